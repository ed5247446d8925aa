# GENERATED VERSION FILE
# TIME: Sun Oct 18 03:57:58 2026
__version__ = '0.1.0'
__gitsha__ = 'unknown'
version_info = (0, 1, 0)
