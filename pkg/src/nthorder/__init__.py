"""Generation and verification of Nth-order polynomial integrals of motion in two dimensions."""
