"""Compressed (count-sketch) representations of matrix products.

Thin wrapper around the C++ extension module.
"""

try:
    from ._cmm import *  # noqa: F401,F403
    from ._cmm import __doc__ as _doc
except ImportError:  # build-tree layout: extension next to the package dir
    from _cmm import *  # noqa: F401,F403
    from _cmm import __doc__ as _doc

__doc__ = _doc
__version__ = "1.0.0"
