from setuptools import setup, find_packages

VERSION = '0.0.1'
DESCRIPTION = 'covphase: optimal input states and error bounds for U(1) phase estimation with covariant measurements.'
LONG_DESCRIPTION = DESCRIPTION

# Setting up
setup(
    name="covphase",
    version=VERSION,
    description=DESCRIPTION,
    long_description_content_type="text/markdown",
    long_description=LONG_DESCRIPTION,
    python_requires=">=3.10",
    packages=find_packages(exclude=["tests", "tests.*"]),
    install_requires=[
        "numpy >= 1.22",
        "scipy >= 1.9",
        "pandas >= 1.5",
        "joblib",
        "pytest",
    ],
    entry_points={
        "console_scripts": ["covphase=covphase.cli:main"],
    },
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Programming Language :: Python :: 3",
        "Operating System :: Unix",
    ]
)
