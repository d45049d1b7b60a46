"""
setup.py
"""

from setuptools import setup, find_packages

setup(
    name='motionoracle',
    version='0.3.0',
    description='Real-time marker tracking and gesture following over a Variable Markov Oracle.',
    license='Apache 2.0',
    packages=find_packages('src/'),
    package_dir={'': 'src'},
    python_requires='>=3.8',
    install_requires=[
        "numpy >= 1.20",
        "scipy >= 1.6",
        "PyYAML",
        "click",
        "importlib-metadata >= 1.7.0; python_version <= '3.8'",
    ],
    zip_safe=False,
    classifiers=[
        "Programming Language :: Python :: 3 :: Only",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
    ],
    entry_points={
        "console_scripts": ["motionoracle=motionoracle.scripts.motionoracle_cli:cli"]
    }
)
