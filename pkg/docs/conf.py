# Sphinx configuration for the plsga documentation.
#
# Build with `tox -e docs` or `sphinx-build docs docs/_build`.

import os
import sys

sys.path.insert(0, os.path.abspath(".."))

from setup import __version__ as version  # noqa: E402

project = "plsga"
author = "plsga developers"
release = version
version = ".".join(version.split(".")[:2])

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.autosummary",
    "sphinx.ext.napoleon",
    "sphinx.ext.mathjax",
]

master_doc = "index"
source_suffix = [".rst"]
exclude_patterns = ["_build"]
pygments_style = "sphinx"

# The numerical stack is not needed to render the API pages
autodoc_mock_imports = ["docopt", "joblib", "numpy", "pandas", "psutil", "scipy"]
autodoc_member_order = "bysource"
autodoc_typehints = "description"
napoleon_google_docstring = True
napoleon_numpy_docstring = False

html_theme = "alabaster"
html_theme_options = {"description": "GA variable selection for PLS regression"}
htmlhelp_basename = "plsga_doc"
