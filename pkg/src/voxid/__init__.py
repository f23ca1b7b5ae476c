"""Speaker identification from MFCC statistics with from-scratch SVM solvers."""

__version__ = "0.1.0"
