import subprocess
import sys
from setuptools import setup, find_packages

try:
    v = subprocess.run(['git', 'describe', '--tags'],
                       stdout=subprocess.PIPE, stderr=subprocess.DEVNULL).stdout.strip().decode()
    __version__ = v[: v.rfind("-")].replace("-", ".dev") if "-" in v else v
except Exception:
    __version__ = None
__version__ = __version__ or "0.1.0"


package_info = dict(
    name='plsga',
    author='plsga developers',
    version=__version__,
    packages=find_packages(exclude=["tests", "tests.*"]),
    python_requires='>=3.8',
    install_requires=[
        'numpy>=1.20',
        'scipy',
        'pandas>=1.5',
        'joblib',
        'docopt',
        'psutil',
    ],
    setup_requires=(["pytest-runner"] if "test" in sys.argv else []),
    tests_require=["pytest"],
    entry_points=dict(
        console_scripts=[
            'plsga = plsga.commands:plsga',
        ]
    ),
)


if __name__ == "__main__":
    setup(**package_info)
