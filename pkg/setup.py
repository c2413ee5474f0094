"""
Setup script for CovertLink - Square-root-law covert communication toolkit
"""

from setuptools import setup, find_packages

try:
    with open("docs/README.md", "r", encoding="utf-8") as fh:
        long_description = fh.read()
except OSError:
    long_description = "CovertLink - Covert communication budgets and link simulation over bosonic channels"

setup(
    name="covertlink",
    version="1.0.0",
    author="CovertLink Team",
    description="Covert photon budgets, QRE numerics and Monte Carlo link simulation for lossy thermal-noise bosonic channels",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests", "tests.*"]),
    py_modules=["covertlink"],
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Physics",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
    ],
    python_requires=">=3.9",
    install_requires=[
        "numpy>=1.22.0",
        "scipy>=1.9.0",
        "pandas>=1.5.0",
        "PyYAML>=6.0.1",
        "colorlog>=6.7.0",
    ],
    extras_require={
        "test": [
            "pytest>=7.0.0",
            "allure-pytest>=2.13.0",
        ],
    },
    entry_points={
        "console_scripts": [
            "covertlink=covertlink:main",
        ],
    },
    include_package_data=True,
    package_data={
        "config": ["*.yaml", "*.json"],
    },
)
