from ._flatstep import *  # noqa: F401,F403
from ._flatstep import __version__  # noqa: F401
