"""speechmill: build filtered, aligned speech-recognition datasets from
captioned videos."""

__version__ = "0.1.0"
