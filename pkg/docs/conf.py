# Sphinx configuration for the gfcalc documentation.

import os
import sys
sys.path.insert(0, os.path.abspath('..'))


project = 'gfcalc'
copyright = '2026, gfcalc developers'
author = 'gfcalc developers'
master_doc = "index"

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.mathjax'
]

templates_path = ['_templates']
exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']

html_theme = 'alabaster'
html_static_path = ['_static']
