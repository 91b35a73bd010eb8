"""Product-name classification: text vectorizers, learners and evaluation."""

__version__ = "0.1.0"
