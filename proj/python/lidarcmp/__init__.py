"""Geometric similarity metrics, perturbation generators and I/O for LiDAR scans."""

try:
    from ._lidarcmp import *  # noqa: F401,F403  (installed package layout)
    from ._lidarcmp import __version__  # noqa: F401
except ImportError:  # build-tree layout: extension sits next to the package on sys.path
    from _lidarcmp import *  # noqa: F401,F403
    from _lidarcmp import __version__  # noqa: F401
