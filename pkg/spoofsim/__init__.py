import logging
from importlib.metadata import version, PackageNotFoundError
from pkgutil import extend_path


try:
    __version__ = version("spoofsim")
except PackageNotFoundError:
    __version__ = "unknown"

# Extend the search path for the modules which comprise a package, so that
# case pipelines can be distributed from separate directories on sys.path
__path__ = extend_path(__path__, __name__)

# Set up the package-wide logging environment
logger = logging.getLogger(__name__)

# Component names that may be dynamically imported by `custom_import`
NAMES = ["workflow", "system"]
