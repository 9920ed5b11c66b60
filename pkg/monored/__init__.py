"""All first-party code for reducing failure-inducing inputs."""

__version__ = "0.1.0"
