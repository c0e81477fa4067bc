from setuptools import setup  # noqa: I002

setup()
