"""Toolkit for analysing short-story corpora as cognitive word networks.

Converts stories (via externally produced dependency parses) into forma
mentis networks, extracts 13 network/emotion features, predicts 3-class
creativity ratings with tree ensembles, and explains the predictions with
exact tree-Shapley attributions.
"""

__version__ = "0.1.0"
