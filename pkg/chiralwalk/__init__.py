"""chiralwalk - continuous-time chiral quantum walks under unitary and Lindblad dynamics"""

__version__ = "0.1.0"
