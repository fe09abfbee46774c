"""Actor-critic control of plastic recurrent weights in reservoir classifiers."""

__version__ = "0.1.0"
