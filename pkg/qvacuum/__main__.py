from qvacuum.cli import main

main()
