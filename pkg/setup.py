'''
This file is used to install the package in the system.
'''
from setuptools import setup, find_packages

setup(
    name='g_capacity_toolkit',
    version='0.1.0',
    packages=find_packages(exclude=['tests', 'tests.*', 'examples', 'examples.*']),
    python_requires='>=3.10',
    install_requires=[
        'numpy',
        'scipy',
    ],
    extras_require={
        'test': [
            'pytest',
            'hypothesis',
        ],
    },
    entry_points={
        'console_scripts': [
            'gcapacity=gcapacity.system.cli:main',
        ],
    },
    author='Alireza Amani',
    author_email='alireza.amani101@gmail.com',
    description='G-capacities under volatility uncertainty: closed forms, G-heat PDE and Monte Carlo',
)
