"""Community detection and edge recovery on uncertain networks."""

from _uncnet import *  # noqa: F401,F403
