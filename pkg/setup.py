import sys
from pathlib import Path

from setuptools import find_namespace_packages, setup

ROOT_FOLDER = Path(__file__).parent.absolute()
REQUIREMENTS_FOLDER = ROOT_FOLDER / "phaselab"

# Since we're importing `phaselab` package, we have to ensure that it's in sys.path.
sys.path.insert(0, str(ROOT_FOLDER))

from phaselab import VersionInfo

version, _ = VersionInfo._get_version()


def get_requirements(fp):
    return [line.strip() for line in fp.read().splitlines() if line.strip() and not line.strip().startswith("#")]


with open(REQUIREMENTS_FOLDER / "base.txt", encoding="utf-8") as fp:
    install_requires = get_requirements(fp)


# Metadata and options defined in pyproject.toml
setup(
    name="phaselab",
    version=version,
    python_requires=">=3.9",
    install_requires=install_requires,
    packages=find_namespace_packages(include=["phaselab", "phaselab.*"]),
    package_data={"phaselab": ["base.txt"]},
    entry_points={"console_scripts": ["phaselab=phaselab.__main__:main"]},
)
