"""Phrase-retrieval question answering with contextualized sparse representations."""

try:
    from ._sparc import *  # noqa: F401,F403  (installed wheel layout)
except ImportError:  # in-tree builds expose _sparc on PYTHONPATH directly
    from _sparc import *  # noqa: F401,F403
