# Two-dimensional discrete-time quantum walks under noise
__version__ = "1.0.0"
