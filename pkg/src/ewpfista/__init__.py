"""Edge-weighted projected FISTA for undersampled MRI reconstruction."""

__version__ = "0.1.0"
