try:
    from hecke_nullity.__version__ import version
except ImportError:  # not installed from a git checkout
    version = "0.0.0"

__version__ = version
