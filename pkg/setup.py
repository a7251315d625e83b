#!/usr/bin/env python3
"""
Setup script for de Sitter Gravity
"""

from setuptools import setup, find_packages
from pathlib import Path

# Read the README file
this_directory = Path(__file__).parent
long_description = (this_directory / "README.md").read_text()

setup(
    name="desitter-gravity",
    version="1.0.0",
    author="de Sitter Gravity Developers",
    author_email="developer@example.com",
    description="Gravity as an SO(4,1) Yang-Mills gauge theory: lattice, field equations, geodesics, 1PN, radiation and cosmology",
    long_description=long_description,
    long_description_content_type="text/markdown",
    url="https://github.com/your-username/desitter-gravity",
    packages=find_packages(where="src"),
    package_dir={"": "src"},
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Topic :: Scientific/Engineering :: Physics",
        "Topic :: Scientific/Engineering :: Astronomy",
    ],
    python_requires=">=3.10",
    install_requires=[
        "numpy>=1.26.0",
        "scipy>=1.11.0",
        "astropy>=5.3",
        "rich>=13.0.0",
        "click>=8.1.0",
        "python-dotenv>=1.0.0",
        "pydantic>=2.0.0",
        "loguru>=0.7.0",
    ],
    extras_require={
        "dev": [
            "pytest>=7.4.0",
            "black>=23.0.0",
            "flake8>=6.0.0",
        ],
    },
    entry_points={
        "console_scripts": [
            "dsgravity=desitter_gravity.cli:main",
        ],
    },
    include_package_data=True,
    zip_safe=False,
)
