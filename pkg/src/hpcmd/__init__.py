"""Hardware-performance-counter malware detection toolkit."""
__version__ = "0.1.0"
