"""Grounded self-learning dialogue service.

Answers come only from a provided learning document; every answer is followed
by four cause-tagged suggested questions, the learner's inquiry is tracked as
a forest of query trees, and a curated concept graph is served alongside.
"""

__version__ = "0.1.0"
