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

"""API for articulatory feature databases and language inventories."""

import csv
import io
import logging
from dataclasses import dataclass, field
from enum import Enum

from .records import RowsCount, RowsError
from ..config import FEATURES_ATTRIBUTES, FEATURES_EXCLUDED, \
    FEATURES_META_COLUMNS, FEATURES_STRICT
from ..utils import nfd

logger = logging.getLogger(__name__)


class FeatureDbError:
    """Base class for errors in the feature database."""

    class MalformedRow(RowsError.MalformedRow):
        """Row or header does not match the expected layout."""

    class UnknownValue(Exception):
        """Attribute cell is not a value or contour of values."""

    class DanglingAllophone(Exception):
        """Allophone without feature row."""

    class UnknownLanguage(Exception):
        """Language has no inventory."""

    class UnknownSegment(Exception):
        """IPA string has no feature row."""

    class BroadcastMismatch(Exception):
        """Contour lengths can not be broadcast."""

    class EmptyTarget(Exception):
        """Target inventory without phonemes."""


class AttributeValue(Enum):
    """Value of an articulatory attribute."""

    PLUS = '+'
    MINUS = '-'
    ZERO = '0'

    @classmethod
    def parse(cls, cell):
        """Value from its one character representation."""
        try:
            return cls(cell)
        except ValueError:
            raise FeatureDbError.UnknownValue(f'Unknown value: {cell!r}')

    def render(self):
        """One character representation."""
        return self.value

    @property
    def label(self):
        """Label used in attribute value names, e.g. ``+click``."""
        return self.value


#: Attribute values in identifier order.
ATTRIBUTE_VALUES = tuple(AttributeValue)


@dataclass(frozen=True)
class Contour:
    """Ordered attribute values of one segment."""

    values: tuple

    def __post_init__(self):
        """Check the contour is not empty."""
        if not self.values:
            raise FeatureDbError.UnknownValue('Empty contour')

    @classmethod
    def parse(cls, cell):
        """Contour from a cell like ``+,-,-``."""
        return cls(tuple(
            AttributeValue.parse(part) for part in cell.strip().split(',')))

    def render(self):
        """Comma joined values."""
        return ','.join(value.render() for value in self.values)

    def __len__(self):
        """Number of values."""
        return len(self.values)

    @property
    def first(self):
        """First value, used for composition and distances."""
        return self.values[0]


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered attribute names and the excluded ones."""

    attribute_names: tuple = tuple(FEATURES_ATTRIBUTES)
    excluded: frozenset = frozenset(FEATURES_EXCLUDED)

    @property
    def effective(self):
        """Attributes used by every algorithm."""
        return tuple(name for name in self.attribute_names
                     if name not in self.excluded)

    @classmethod
    def create(cls, attribute_names=None, excluded=None):
        """Schema from plain sequences."""
        return cls(
            attribute_names=tuple(attribute_names or FEATURES_ATTRIBUTES),
            excluded=frozenset(
                FEATURES_EXCLUDED if excluded is None else excluded)
        )


@dataclass
class Segment:
    """An IPA phone or phoneme with its attribute contours."""

    ipa: str
    attributes: dict
    segment_class: str = None

    def __post_init__(self):
        """Normalize the IPA string."""
        self.ipa = nfd(self.ipa)

    def contour(self, name):
        """Contour of an attribute."""
        return self.attributes[name]

    def with_ipa(self, ipa):
        """Copy with another IPA string."""
        return Segment(ipa=ipa, attributes=dict(self.attributes),
                       segment_class=self.segment_class)


@dataclass
class Inventory:
    """Phonemes of a language and their allophones."""

    language_id: str
    phonemes: list = field(default_factory=list)
    allophones: dict = field(default_factory=dict)
    name: str = ''
    inventory_id: str = ''

    @property
    def phoneme_ipas(self):
        """IPA strings of the phonemes in order."""
        return [phoneme.ipa for phoneme in self.phonemes]

    def allophones_of(self, ipa):
        """Allophones of a phoneme, the phoneme itself by default."""
        return list(self.allophones.get(ipa) or [ipa])

    def __contains__(self, ipa):
        """Test phoneme membership."""
        return ipa in set(self.phoneme_ipas)


@dataclass
class Finding:
    """Validation or parse finding."""

    severity: str
    code: str
    locus: str
    message: str = ''

    def render(self):
        """Machine readable line."""
        return f'{self.severity}\t{self.code}\t{self.locus}'


@dataclass
class FeatureDatabase:
    """Segments and inventories of a feature database."""

    schema: FeatureSchema
    segments: dict = field(default_factory=dict)
    inventories: dict = field(default_factory=dict)
    findings: list = field(default_factory=list)
    header: list = field(default_factory=list)

    def segment(self, ipa):
        """Segment for an IPA string."""
        try:
            return self.segments[nfd(ipa)]
        except KeyError:
            raise FeatureDbError.UnknownSegment(f'No feature row: {ipa}')

    def inventory(self, language_id):
        """Inventory of a language."""
        try:
            return self.inventories[language_id]
        except KeyError:
            raise FeatureDbError.UnknownLanguage(
                f'Unknown language: {language_id}')

    @property
    def extension_ipas(self):
        """Segments not used as phoneme by any inventory."""
        used = set()
        for inventory in self.inventories.values():
            used.update(inventory.phoneme_ipas)
        return [ipa for ipa in self.segments if ipa not in used]


def _segment_from_row(row, line, schema, ipa):
    attributes = {}
    for name in schema.attribute_names:
        try:
            attributes[name] = Contour.parse(row[name])
        except FeatureDbError.UnknownValue as err:
            raise FeatureDbError.UnknownValue(
                f'line {line}: {ipa} {name}: {err}')
    return Segment(ipa=ipa, attributes=attributes,
                   segment_class=row.get('SegmentClass') or None)


def parse_database(csv_stream, schema_config=None, strict=FEATURES_STRICT):
    """Parse a PHOIBLE style feature database.

    :param csv_stream: text stream or CSV string.
    :param schema_config: FeatureSchema listing the used attributes.
    :param strict: dangling allophones raise instead of being skipped.
    :return: FeatureDatabase
    """
    if isinstance(csv_stream, str):
        csv_stream = io.StringIO(csv_stream)
    schema_config = schema_config or FeatureSchema()
    rows = RowsCount(csv_stream)
    header = rows.header
    feature_columns = [name for name in header
                       if name not in FEATURES_META_COLUMNS]
    if 'Phoneme' not in header:
        raise FeatureDbError.MalformedRow('line 1: no Phoneme column')
    missing = [name for name in schema_config.attribute_names
               if name not in feature_columns]
    if missing:
        raise FeatureDbError.MalformedRow(
            f'line 1: missing attribute columns: {", ".join(missing)}')
    configured = set(schema_config.attribute_names)
    schema = FeatureSchema(
        attribute_names=tuple(feature_columns),
        excluded=frozenset(
            name for name in feature_columns
            if name in schema_config.excluded or name not in configured)
    )
    database = FeatureDatabase(schema=schema, header=list(header))
    inventory_keys = {}
    try:
        for row, line in rows:
            ipa = nfd(row['Phoneme'])
            segment = _segment_from_row(row, line, schema, ipa)
            known = database.segments.get(ipa)
            if known is None:
                database.segments[ipa] = segment
            elif known.attributes != segment.attributes:
                database.findings.append(Finding(
                    'error', 'conflicting_segment', f'line {line}: {ipa}',
                    'feature row differs from a previous row'))
            inventory_id = row.get('InventoryID', '').strip()
            if not inventory_id:
                continue
            language_id = row.get('ISO6393', '').strip() or inventory_id
            first_id = inventory_keys.setdefault(language_id, inventory_id)
            if first_id != inventory_id:
                database.findings.append(Finding(
                    'warning', 'duplicate_inventory',
                    f'line {line}: {language_id}',
                    f'inventory {inventory_id} ignored, using {first_id}'))
                continue
            inventory = database.inventories.setdefault(
                language_id,
                Inventory(language_id=language_id,
                          name=row.get('LanguageName', '').strip(),
                          inventory_id=inventory_id)
            )
            if ipa in inventory:
                database.findings.append(Finding(
                    'error', 'duplicate_ipa',
                    f'line {line}: {language_id} {ipa}',
                    'phoneme listed twice'))
                continue
            inventory.phonemes.append(database.segments[ipa])
            allophones = [nfd(phone)
                          for phone in row.get('Allophones', '').split()]
            if allophones:
                inventory.allophones[ipa] = allophones
    except RowsError.MalformedRow as err:
        raise FeatureDbError.MalformedRow(str(err))
    _resolve_allophones(database, strict)
    return database


def _resolve_allophones(database, strict):
    for language_id, inventory in database.inventories.items():
        for ipa, phones in list(inventory.allophones.items()):
            kept = []
            for phone in phones:
                if phone in database.segments:
                    if phone not in kept:
                        kept.append(phone)
                    continue
                locus = f'{language_id} {ipa} > {phone}'
                if strict:
                    raise FeatureDbError.DanglingAllophone(locus)
                logger.warning(f'Dangling allophone skipped: {locus}')
                database.findings.append(Finding(
                    'warning', 'dangling_allophone', locus,
                    'allophone without feature row skipped'))
            if kept:
                inventory.allophones[ipa] = kept
            else:
                inventory.allophones.pop(ipa)


def load_database(file_name, schema_config=None, strict=FEATURES_STRICT):
    """Parse a feature database file."""
    with open(file_name, encoding='utf-8', newline='') as stream:
        return parse_database(stream, schema_config=schema_config,
                              strict=strict)


def render_database(database, stream=None):
    """Write a database in the CSV layout it was parsed from.

    :return: the CSV text when no stream is given.
    """
    output = stream or io.StringIO()
    header = database.header or (
        ['InventoryID', 'ISO6393', 'LanguageName', 'Phoneme', 'Allophones',
         'SegmentClass'] + list(database.schema.attribute_names))
    writer = csv.writer(output, lineterminator='\n')
    writer.writerow(header)

    def row_for(segment, inventory=None):
        values = {
            'Phoneme': segment.ipa,
            'SegmentClass': segment.segment_class or '',
        }
        if inventory:
            values.update({
                'InventoryID': inventory.inventory_id,
                'ISO6393': inventory.language_id,
                'LanguageName': inventory.name,
                'Allophones': ' '.join(
                    inventory.allophones.get(segment.ipa, [])),
            })
        for name in database.schema.attribute_names:
            values[name] = segment.attributes[name].render()
        return [values.get(column, '') for column in header]

    for inventory in database.inventories.values():
        for segment in inventory.phonemes:
            writer.writerow(row_for(segment, inventory))
    for ipa in database.extension_ipas:
        writer.writerow(row_for(database.segments[ipa]))
    if stream is None:
        return output.getvalue()


def first_value_vector(segment, schema):
    """First values of every effective attribute contour."""
    return tuple(segment.attributes[name].first for name in schema.effective)


def attribute_value_census(database, training_language_ids):
    """Attribute values attested by the phonemes of some languages.

    :return: set of (attribute, AttributeValue) pairs.
    """
    census = set()
    effective = database.schema.effective
    for language_id in training_language_ids:
        inventory = database.inventory(language_id)
        for phoneme in inventory.phonemes:
            census.update(zip(effective,
                              first_value_vector(phoneme, database.schema)))
    return census


def missing_attribute_values(database, training_language_ids):
    """Attribute values never attested, in schema and value order."""
    census = attribute_value_census(database, training_language_ids)
    return [(name, value) for name in database.schema.effective
            for value in ATTRIBUTE_VALUES if (name, value) not in census]


def attribute_alphabets(segments, schema):
    """Values used in the full contours of segments, per attribute.

    Attribute classifiers predict these values, values keep the
    :data:`ATTRIBUTE_VALUES` order.
    """
    seen = {name: set() for name in schema.effective}
    for segment in segments:
        for name in schema.effective:
            seen[name].update(segment.attributes[name].values)
    return {name: [value for value in ATTRIBUTE_VALUES if value in values]
            for name, values in seen.items()}


def feature_table(segment, schema):
    """Attribute and contour pairs of a segment, excluded ones flagged."""
    return [(name, segment.attributes[name].render(), name in schema.excluded)
            for name in schema.attribute_names]
