__version__ = "0.1.0"

from . import config, params  # noqa: E402

__all__ = ["__version__", "config", "params"]
