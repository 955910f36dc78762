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

"""Feature database validation."""

from dataclasses import dataclass, field

from .api import AttributeValue, Finding
from ..config import FEATURES_STRESS_ATTRIBUTE


@dataclass
class ValidationReport:
    """Warnings and errors of a validation."""

    findings: list = field(default_factory=list)

    @property
    def warnings(self):
        """Warning findings."""
        return [finding for finding in self.findings
                if finding.severity == 'warning']

    @property
    def errors(self):
        """Error findings."""
        return [finding for finding in self.findings
                if finding.severity == 'error']

    def __bool__(self):
        """A report is true when it has findings."""
        return bool(self.findings)

    def render_lines(self):
        """One finding per line: severity, code, locus."""
        return '\n'.join(finding.render() for finding in self.findings)

    def render_text(self):
        """Human readable report."""
        lines = [f'{len(self.errors)} error(s), '
                 f'{len(self.warnings)} warning(s)']
        for finding in self.findings:
            message = f': {finding.message}' if finding.message else ''
            lines.append(f'  {finding.severity.upper():8} {finding.code} '
                         f'[{finding.locus}]{message}')
        return '\n'.join(lines)


class Validation(object):
    """Validation rules of a feature database.

    Every method starting with ``check`` is a rule returning findings.
    """

    def __init__(self, database, validate=True):
        """Constructor."""
        self.database = database
        self.report = ValidationReport()
        if validate:
            self._validate()

    def _validate(self):
        """Call the validation rules."""
        for func in sorted(dir(self)):
            if func.startswith('check'):
                func = getattr(self, func)
                self.report.findings.extend(func())

    def check_parse_findings(self):
        """Findings collected while parsing."""
        return list(self.database.findings)

    def check_stress_plus(self):
        """Stress is only ``-`` or ``0`` in the database convention."""
        findings = []
        schema = self.database.schema
        if FEATURES_STRESS_ATTRIBUTE not in schema.attribute_names:
            return findings
        for ipa, segment in self.database.segments.items():
            contour = segment.attributes[FEATURES_STRESS_ATTRIBUTE]
            if AttributeValue.PLUS in contour.values:
                findings.append(Finding(
                    'warning', 'stress_plus', ipa,
                    f'{FEATURES_STRESS_ATTRIBUTE} is {contour.render()}'))
        return findings

    def check_contour_lengths(self):
        """Contours have length 1 or a common maximal length."""
        findings = []
        for ipa, segment in self.database.segments.items():
            lengths = {len(contour) for contour in segment.attributes.values()}
            if len(lengths - {1}) > 1:
                findings.append(Finding(
                    'error', 'contour_broadcast', ipa,
                    'contour lengths '
                    f'{", ".join(str(length) for length in sorted(lengths))}'))
        return findings

    def check_schema_attributes(self):
        """Every schema attribute is present exactly once."""
        findings = []
        names = set(self.database.schema.attribute_names)
        for ipa, segment in self.database.segments.items():
            if set(segment.attributes) != names:
                findings.append(Finding(
                    'error', 'schema_mismatch', ipa,
                    'attributes differ from the schema'))
        return findings

    def check_inventories(self):
        """Allophone keys are phonemes, phones resolve, no duplicates."""
        findings = []
        segments = self.database.segments
        for language_id, inventory in self.database.inventories.items():
            ipas = inventory.phoneme_ipas
            for ipa in sorted({ipa for ipa in ipas if ipas.count(ipa) > 1}):
                findings.append(Finding(
                    'error', 'duplicate_ipa', f'{language_id} {ipa}'))
            for ipa, phones in inventory.allophones.items():
                if ipa not in ipas:
                    findings.append(Finding(
                        'error', 'allophone_key', f'{language_id} {ipa}',
                        'allophone entry for a missing phoneme'))
                for phone in phones:
                    if phone not in segments:
                        findings.append(Finding(
                            'warning', 'dangling_allophone',
                            f'{language_id} {ipa} > {phone}'))
        return findings


def validate(database):
    """Validate a feature database, never raises.

    :return: ValidationReport
    """
    return Validation(database).report
