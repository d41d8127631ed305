"""Python interface to the private saddle-point / variational-inequality
solver library.  All heavy lifting happens in the compiled ``_dpvi``
extension module."""

try:
    # installed wheel layout: extension inside the package
    from dpvi._dpvi import *  # noqa: F401,F403
    from dpvi._dpvi import __doc__  # noqa: F401
except ImportError:
    # development layout: extension on sys.path next to the build tree
    from _dpvi import *  # noqa: F401,F403
    from _dpvi import __doc__  # noqa: F401
