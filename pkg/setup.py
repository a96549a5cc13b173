from setuptools import setup, find_packages

setup(
    name             = 'er-cavity-toolkit',
    version          = '1.0.0',
    description      = 'Er:YSO nanocavity toolkit: Purcell enhancement, rate chain, optical pumping and fitting',
    author           = 'Er Cavity Toolkit Contributors',
    packages         = find_packages(exclude=['tests*']),
    install_requires = ['numpy>=1.22', 'scipy>=1.8'],
    extras_require   = {'dev': ['pytest>=8.0.0']},
    entry_points     = {
        'console_scripts': [
            'ercavity = ercavity.cli:main',
        ],
    },
    python_requires  = '>=3.10',
    classifiers      = [
        'Programming Language :: Python :: 3',
        'License :: OSI Approved :: MIT License',
        'Operating System :: OS Independent',
        'Topic :: Scientific/Engineering :: Physics',
    ],
)
