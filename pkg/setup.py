from setuptools import setup, find_packages

setup(
    name="ca-graphlab",
    version="0.1.0",
    description="Clustering-attachment random graph simulation and tail index estimation",
    license="MIT",
    packages=find_packages(exclude=["tests"]),
    install_requires=[
        "numpy",
        "pandas",
        "cytoolz",
        "pyyaml",
        "matplotlib",
        "tqdm",
        "typer",
    ],
    extras_require={
        "dev": ["mypy", "pytest", "black", "hypothesis", "networkx", "scipy",]
    },
    entry_points={"console_scripts": ["ca-graphlab=ca_graphlab.cmd:app"],},
)
