"""A setuptools based setup module for HybridQueryMSA."""

from setuptools import setup, find_packages
# To use a consistent encoding
from codecs import open
from os import path

here = path.abspath(path.dirname(__file__))

with open(path.join(here, "HybridQueryMSA", "VERSION")) as version_file:
    version = version_file.read().strip()

# Get the long description from the README file
with open(path.join(here, 'README.md'), encoding='utf-8') as f:
    long_description = f.read()

setup(
    name="HybridQueryMSA",
    version=version,

    description="Hybrid quantum-classical multiple sequence alignment on a statevector simulator",
    long_description=long_description,
    long_description_content_type="text/markdown",

    license='MIT',

    classifiers=[
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'Topic :: Scientific/Engineering :: Bio-Informatics',
        'Topic :: Scientific/Engineering :: Physics',
        'License :: OSI Approved :: MIT License',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
    ],

    keywords="multiple sequence alignment vqe cvar qaoa statevector",

    packages=find_packages(include=["HybridQueryMSA", "HybridQueryMSA.report"]),

    # VERSION ships inside the package.
    include_package_data=True,
    package_data={
        "HybridQueryMSA": ["VERSION"],
    },

    python_requires=">=3.8",

    install_requires=[
        "numpy>=1.20",
        "scipy>=1.7",
        "networkx>=2.6",
        "pandas>=1.3",
        "pyyaml>=5.4",
    ],

    # $ pip install -e .[dev,test]
    extras_require={
        'dev': ['check-manifest'],
        'test': ['coverage'],
    },

    entry_points={
        'console_scripts': [
            'hqmsa=HybridQueryMSA.__main__:main',
        ],
    },
)
