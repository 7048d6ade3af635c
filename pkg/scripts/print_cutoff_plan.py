#!/usr/bin/env python3
"""
Script to print the cutoffs the planner picks for a range of epsilon values.
"""

import sys
import os
import logging

# Add parent directory to Python path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from qvacuum.core.config import settings
from qvacuum.services.vacuum import plan_cutoff, plan_residual_cutoff

# Configure logging
logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)

EPSILONS = [0.1, 0.2, 0.3, 0.5, 0.75, 1.0, 1.5]

def main():
    """Print weight-level and residual-level cutoffs with the matching one-momentum dimension"""
    tol = float(sys.argv[1]) if len(sys.argv) > 1 else settings.DEFAULT_TOLERANCE
    logger.info(f"Cutoff plan at tolerance {tol:g}")
    for eps in EPSILONS:
        weight = plan_cutoff(eps, tol)
        residual = plan_residual_cutoff(eps, tol)
        logger.info(
            f"  eps={eps:<5} weight cutoff {weight:>4}  residual cutoff {residual:>4}  "
            f"one-momentum dimension {(residual + 1) ** 4:>12,}"
        )

if __name__ == "__main__":
    main()
