from .wrapper import KinRealizeAPI
from .version import __version__
