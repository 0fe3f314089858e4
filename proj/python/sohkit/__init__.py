"""Battery SOH dataset generation and lightweight regressor exploration."""

try:
    from ._core import *  # noqa: F401,F403
    from ._core import __doc__ as _core_doc
except ImportError:  # build-tree layout: extension next to the package on sys.path
    from _core import *  # noqa: F401,F403
    from _core import __doc__ as _core_doc

__doc__ = _core_doc
__version__ = "0.1.0"
