"""
Packaging for hypangles
"""
import re
from pathlib import Path

from setuptools import find_packages, setup

ROOT = Path(__file__).parent

# Single source for the version: Settings.VERSION
VERSION = re.search(
    r'VERSION:\s*str\s*=\s*"([^"]+)"', (ROOT / "config" / "settings.py").read_text(encoding="utf-8")
).group(1)

REQUIREMENTS = [
    line.strip()
    for line in (ROOT / "requirements.txt").read_text(encoding="utf-8").splitlines()
    if line.strip() and not line.lstrip().startswith("#")
]

setup(
    name="hypangles",
    version=VERSION,
    description="Pair correlation of hyperbolic angles in lattice orbits of the upper half-plane",
    long_description=(ROOT / "README.md").read_text(encoding="utf-8"),
    long_description_content_type="text/markdown",
    license="MIT",
    packages=find_packages(include=["config", "config.*", "src", "src.*", "scripts"]),
    python_requires=">=3.9",
    install_requires=REQUIREMENTS,
    extras_require={
        "dev": ["pytest>=7.3.0", "pytest-cov>=4.1.0", "black>=23.3.0", "flake8>=6.0.0", "isort>=5.12.0"],
    },
    entry_points={"console_scripts": ["hypangles=scripts.hypangles:main"]},
    classifiers=[
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
)
