from setuptools import setup, find_packages

setup(
    name="whataboutism",
    version="0.1.0",
    author="Whataboutism contributors",
    description="Equilibrium solver and Monte Carlo verifier for the whataboutism psychological game.",
    packages=find_packages(exclude=["tests", "tests.*"]),
    install_requires=[
        "numpy>=1.17",
        "pandas>=1.5",
        "scipy",
    ],
    tests_require=[
        "pytest",
        "hypothesis",
    ],
    entry_points={
        "console_scripts": [
            "whataboutism=whataboutism.cli:main",
        ],
    },
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: MacOS",
        "Operating System :: POSIX",
    ],
    python_requires=">=3.8",
)
