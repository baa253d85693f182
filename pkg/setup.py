from setuptools import setup, find_packages

setup(
    name='varheat',
    version='0.1.0',
    packages=find_packages(where='src'),
    package_dir={'': 'src'},
    install_requires=[
        'numpy>=1.22.0',
        'scipy>=1.9.0',
        'python-dotenv>=1.0.0',
        'PyYAML>=6.0',
    ],
    extras_require={
        'test': [
            'pytest>=7.0',
            'hypothesis>=6.0',
        ],
    },
    entry_points={
        'console_scripts': [
            'varheat=varheat.cli:main',
        ],
    },
)
