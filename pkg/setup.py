import pathlib

from setuptools import find_packages, setup

# The directory containing this file
HERE = pathlib.Path(__file__).parent

# The text of the README file
README = (HERE / "README.md").read_text()

version_path = HERE / "risjam" / "__version__.py"
with open(version_path, "r") as fh:
    version_dict = {}
    exec(fh.read(), version_dict)
    VERSION = version_dict["__version__"]


setup(
    name="risjam",
    version=VERSION,
    description=("RIS-assisted proactive monitoring and jamming simulator"),
    license="BSD",
    packages=find_packages(exclude=["tests", "examples", "examples.*"]),
    install_requires=["numpy>=1.20", "toml>=0.10"],
    extras_require={"test": ["pytest", "pytest-cov", "scipy"]},
    entry_points={"console_scripts": ["risjam=risjam.cli:main"]},
    long_description=README,
    long_description_content_type="text/markdown",
    classifiers=[
        "Development Status :: 3 - Alpha",
        "License :: OSI Approved :: BSD License",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3 :: Only",
        "Topic :: Scientific/Engineering",
    ],
)
