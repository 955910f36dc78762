# -*- coding: utf-8 -*-
#
# RERO PHONREC
# Copyright (C) 2023 RERO
#
# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU Affero General Public License as published by
# the Free Software Foundation, version 3 of the License.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE. See the
# GNU Affero General Public License for more details.
#
# You should have received a copy of the GNU Affero General Public License
# along with this program. If not, see <http://www.gnu.org/licenses/>.

"""Sphinx configuration."""

from __future__ import print_function

import os

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.coverage',
    'sphinx.ext.doctest',
    'sphinx.ext.intersphinx',
    'sphinx.ext.viewcode',
]
templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = u'RERO PHONREC'
copyright = u'2023, RERO'
author = u'RERO'

# Get the version string. Cannot be done with import!
g = {}
with open(os.path.join(os.path.dirname(__file__), '..', 'rero_phonrec',
                       'version.py'), 'rt') as fp:
    exec(fp.read(), g)
    version = g['__version__']
release = version

exclude_patterns = ['_build']
pygments_style = 'sphinx'

html_theme = 'alabaster'
html_theme_options = {
    'description': 'Multilingual phoneme recognition with composed phoneme '
                   'embeddings.',
    'github_user': 'rero',
    'github_repo': 'rero-phonrec',
    'github_button': False,
    'show_powered_by': False,
}
htmlhelp_basename = 'rero-phonrec_namedoc'

intersphinx_mapping = {
    'python': ('https://docs.python.org/3/', None),
    'numpy': ('https://numpy.org/doc/stable/', None),
    'scipy': ('https://docs.scipy.org/doc/scipy/', None),
}

autoclass_content = 'both'
