import setuptools
from apmas._version import __version__

with open("README.md", "r") as fh:
    long_description = fh.read()


setuptools.setup(
    name="apmas",
    version=__version__,
    description="Simulator and convergence certifier for active-passive networked multiagent systems",
    license="GPLv3",
    packages=setuptools.find_packages(exclude=["tests", "tests.*"]),
    classifiers=[
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: Implementation :: CPython",
        "Environment :: Console",
        "Topic :: Scientific/Engineering :: Mathematics",
        "License :: OSI Approved :: GNU General Public License v3 (GPLv3)"
    ],
    python_requires='>=3.10',
    install_requires=["ptlibs>=1.0.33,<2", "numpy>=1.24", "scipy>=1.10", "networkx>=3.0"],
    extras_require={"test": ["pytest>=7", "hypothesis>=6"]},
    entry_points = {'console_scripts': ['apmas = apmas.apmas:main']},
    include_package_data= True,
    long_description=long_description,
    long_description_content_type="text/markdown",
)
