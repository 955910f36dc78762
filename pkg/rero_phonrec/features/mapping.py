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

"""Map phoneme sets onto inventories by attribute Hamming distance."""

from dataclasses import dataclass, field

from .api import Contour, FeatureDbError, Segment, first_value_vector
from ..config import MAPPING_SUBSEGMENT_SEPARATOR


@dataclass
class MappingResult:
    """Source phonemes mapped onto a target inventory."""

    pairs: dict = field(default_factory=dict)
    coverage: float = 0.0
    unmapped: set = field(default_factory=set)
    distances: dict = field(default_factory=dict)
    splits: set = field(default_factory=set)
    retained_coverage: float = 0.0


def hamming(a, b, schema):
    """Number of effective attributes with differing first values."""
    return sum(
        value_a != value_b for value_a, value_b in zip(
            first_value_vector(a, schema), first_value_vector(b, schema)))


def subsegment_count(segment, schema=None):
    """Maximal contour length over the effective attributes."""
    names = schema.effective if schema else segment.attributes
    return max(len(segment.attributes[name]) for name in names)


def split_segment(segment, schema=None):
    """Split a complex segment into simple sub-segments.

    Length 1 contours broadcast to every sub-segment. Contours of the
    attributes outside of the schema only give their first value.
    """
    count = subsegment_count(segment, schema)
    if count == 1:
        return [segment]
    names = schema.effective if schema else segment.attributes
    for name in names:
        contour = segment.attributes[name]
        if len(contour) not in (1, count):
            raise FeatureDbError.BroadcastMismatch(
                f'{segment.ipa}: {name} has {len(contour)} values, '
                f'expected 1 or {count}')
    return [
        Segment(
            ipa=f'{segment.ipa}{MAPPING_SUBSEGMENT_SEPARATOR}{index}',
            attributes={
                name: Contour((contour.values[index if len(contour) == count
                                              else 0], ))
                for name, contour in segment.attributes.items()
            },
            segment_class=segment.segment_class
        )
        for index in range(count)
    ]


def closest(segment, targets, schema):
    """Closest target with its distance.

    Ties prefer fewer sub-segments, then the smallest IPA string.
    """
    best = min(
        targets,
        key=lambda target: (hamming(segment, target, schema),
                            subsegment_count(target, schema), target.ipa)
    )
    return best, hamming(segment, best, schema)


def map_inventory(source, target, db):
    """Map source phonemes onto a target inventory.

    :param source: iterable of Segment, e.g. grapheme to phoneme output.
    :param target: Inventory.
    :param db: FeatureDatabase providing the schema.
    :return: MappingResult
    """
    schema = db.schema
    targets = list(target.phonemes)
    if not targets:
        raise FeatureDbError.EmptyTarget(
            f'Empty target inventory: {target.language_id}')
    target_ipas = {segment.ipa for segment in targets}
    result = MappingResult()
    for segment in source:
        if segment.ipa in target_ipas:
            result.pairs[segment.ipa] = [segment.ipa]
            result.distances[segment.ipa] = 0
            continue
        best, distance = closest(segment, targets, schema)
        if subsegment_count(segment, schema) == \
                subsegment_count(best, schema):
            result.pairs[segment.ipa] = [best.ipa]
            result.distances[segment.ipa] = distance
            continue
        try:
            parts = split_segment(segment, schema)
        except FeatureDbError.BroadcastMismatch:
            result.unmapped.add(segment.ipa)
            continue
        mapped = [closest(part, targets, schema) for part in parts]
        result.pairs[segment.ipa] = [part.ipa for part, _ in mapped]
        result.distances[segment.ipa] = sum(dist for _, dist in mapped)
        result.splits.add(segment.ipa)
    covered = {ipa for ipas in result.pairs.values() for ipa in ipas}
    result.coverage = len(covered) / len(target_ipas)
    result.retained_coverage = len(
        {segment.ipa for segment in source} & target_ipas) / len(target_ipas)
    return result


def write_mapping_tsv(result, stream):
    """Write a mapping as TSV with a final coverage comment line."""
    stream.write('source_ipa\ttarget_ipa_sequence\thamming\tsplit\n')
    for ipa, targets in result.pairs.items():
        stream.write(f'{ipa}\t{" ".join(targets)}\t'
                     f'{result.distances[ipa]}\t'
                     f'{str(ipa in result.splits).lower()}\n')
    for ipa in sorted(result.unmapped):
        stream.write(f'# unmapped={ipa}\n')
    stream.write(f'# retained_coverage={result.retained_coverage:.6f}\n')
    stream.write(f'# coverage={result.coverage:.6f}\n')
