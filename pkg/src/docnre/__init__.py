"""Document-level n-ary relation extraction with multiscale representations."""

__version__ = "0.1.0"
