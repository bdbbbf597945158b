"""Numerical experiments on weighted torus identities, scaling ideals of
singular weights, and foliated splitting sections.

Everything lives in the compiled extension; this package re-exports it.
"""

try:
    from ._core import *  # noqa: F401,F403  (installed layout)
    from ._core import __version__  # noqa: F401
except ImportError:  # build-tree layout: _core sits next to the package dir
    from _core import *  # noqa: F401,F403
    from _core import __version__  # noqa: F401
