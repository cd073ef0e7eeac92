"""Near-field probing simulator: trapped atoms coupled to a waveguide mode.

The compiled extension carries the physics; this package re-exports it.
"""

from ._nearprobe import *  # noqa: F401,F403
from ._nearprobe import __version__  # noqa: F401
