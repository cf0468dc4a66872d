from setuptools import setup, find_packages

setup(
    name="seisforge",
    version="0.1.0",
    author="Latiful Mousom",
    author_email="latifulmousom@gmail.com",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    package_data={"seisforge": ["py.typed"]},
)
