from ._rtlab import *  # noqa: F401,F403
from ._rtlab import __version__  # noqa: F401
