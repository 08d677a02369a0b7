"""HTTP microservice serving sentence-pair translation-quality scorers."""

__version__ = "0.1.0"
