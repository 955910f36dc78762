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

"""Test phoneme mapping onto inventories."""

import io

import numpy as np
import pytest

from rero_phonrec.features.api import ATTRIBUTE_VALUES, AttributeValue, \
    Contour, FeatureDbError, Inventory, Segment
from rero_phonrec.features.mapping import closest, hamming, map_inventory, \
    split_segment, subsegment_count, write_mapping_tsv


def test_split_affricate(fixture_db):
    """Test an affricate maps onto a stop and a fricative."""
    source = [fixture_db.segment('t͡s')]
    result = map_inventory(source, fixture_db.inventory('aaa'), fixture_db)
    assert result.pairs == {'t͡s': ['t', 's']}
    assert result.splits == {'t͡s'}
    assert result.distances == {'t͡s': 0}


def test_coverage(fixture_db):
    """Test mapping and coverage of a whole inventory."""
    source = fixture_db.inventory('bbb').phonemes
    target = fixture_db.inventory('aaa')
    result = map_inventory(
        [segment for segment in source if segment.ipa != 't͡s'
         and segment.ipa != 'ai'], target, fixture_db)
    assert result.pairs == {
        't': ['t'], 'd': ['t'], 'n': ['t'], 'a': ['a'], 'i': ['i']}
    assert result.distances['d'] == 1
    assert result.coverage == pytest.approx(3 / 7)
    assert result.retained_coverage == pytest.approx(3 / 7)
    for ipa, targets in result.pairs.items():
        segment = fixture_db.segment(ipa)
        assert min(hamming(segment, other, fixture_db.schema)
                   for other in target.phonemes) == result.distances[ipa]


def test_closest_ties(fixture_db):
    """Test ties prefer the simplest target then the IPA order."""
    schema = fixture_db.schema
    stop = fixture_db.segment('t')
    copies = [stop.with_ipa('tt'), stop.with_ipa('t2')]
    assert closest(stop, copies, schema)[0].ipa == 't2'
    affricate = fixture_db.segment('t͡s')
    best, distance = closest(stop, [affricate.with_ipa('a0'), copies[0]],
                             schema)
    assert (best.ipa, distance) == ('tt', 0)


def test_split_segment(fixture_db):
    """Test sub-segments broadcast single values."""
    parts = split_segment(fixture_db.segment('ai'))
    assert [part.ipa for part in parts] == ['ai#0', 'ai#1']
    assert parts[1].contour('high').first == AttributeValue.PLUS
    assert parts[1].contour('syllabic').first == AttributeValue.PLUS
    assert subsegment_count(parts[0]) == 1
    bad = fixture_db.segment('ai').with_ipa('aiu')
    bad.attributes['back'] = Contour.parse('-,+,-')
    with pytest.raises(FeatureDbError.BroadcastMismatch):
        split_segment(bad)


def test_unmapped_and_empty(fixture_db):
    """Test broken segments are unmapped and empty targets raise."""
    bad = fixture_db.segment('ai').with_ipa('aiu')
    bad.attributes['back'] = Contour.parse('-,+,-')
    result = map_inventory([bad], fixture_db.inventory('aaa'), fixture_db)
    assert result.unmapped == {'aiu'}
    assert result.pairs == {}
    with pytest.raises(FeatureDbError.EmptyTarget):
        map_inventory([bad], Inventory('zzz'), fixture_db)


def test_write_mapping_tsv(fixture_db):
    """Test the TSV mapping output."""
    source = [fixture_db.segment('t͡s'), fixture_db.segment('a'),
              Segment('x', dict(fixture_db.segment('k').attributes))]
    result = map_inventory(source, fixture_db.inventory('aaa'), fixture_db)
    stream = io.StringIO()
    write_mapping_tsv(result, stream)
    lines = stream.getvalue().splitlines()
    assert lines[0] == 'source_ipa\ttarget_ipa_sequence\thamming\tsplit'
    assert lines[1] == 't͡s\tt s\t0\ttrue'
    assert lines[2] == 'a\ta\t0\tfalse'
    assert lines[3] == 'x\tk\t0\tfalse'
    assert lines[-1] == '# coverage=0.571429'
    assert lines[-2] == '# retained_coverage=0.142857'


def _random_segments(rng, schema, count, prefix, complex_every=0):
    """Segments with random values, every n-th one with an affricate."""
    segments = []
    for index in range(count):
        attributes = {
            name: Contour((ATTRIBUTE_VALUES[int(rng.integers(3))], ))
            for name in schema.attribute_names}
        if complex_every and index % complex_every == 0:
            attributes['continuant'] = Contour.parse('-,+')
        segments.append(Segment(f'{prefix}{index:02d}', attributes))
    return segments


def _distance(a, b, schema):
    """Disagreeing first values counted attribute by attribute."""
    count = 0
    for name in schema.effective:
        if a.attributes[name].values[0] != b.attributes[name].values[0]:
            count += 1
    return count


def _by_ipa(segments, ipa):
    """Segment of a list by IPA string."""
    return next(segment for segment in segments if segment.ipa == ipa)


def test_closest_exhaustive(fixture_db):
    """Test the closest target against an exhaustive search."""
    schema = fixture_db.schema
    rng = np.random.default_rng(7)
    for _ in range(50):
        targets = _random_segments(rng, schema, 20, 't', complex_every=4)
        segment = _random_segments(rng, schema, 1, 's')[0]
        best, distance = closest(segment, targets, schema)
        ranked = sorted(
            (_distance(segment, target, schema),
             subsegment_count(target, schema), target.ipa)
            for target in targets)
        assert (distance, subsegment_count(best, schema), best.ipa) == \
            ranked[0]
        assert distance == hamming(best, segment, schema)


def test_mapping_minimal(fixture_db):
    """Test every mapped pair is minimal over the whole target."""
    schema = fixture_db.schema
    rng = np.random.default_rng(11)
    targets = _random_segments(rng, schema, 50, 't', complex_every=5)
    sources = _random_segments(rng, schema, 30, 's', complex_every=3)
    result = map_inventory(sources, Inventory('zzz', phonemes=targets),
                           fixture_db)
    assert set(result.pairs) | result.unmapped == \
        {segment.ipa for segment in sources}
    target_ipas = {target.ipa for target in targets}
    for source in sources:
        mapped = result.pairs[source.ipa]
        assert set(mapped) <= target_ipas
        parts = split_segment(source, schema) \
            if source.ipa in result.splits else [source]
        assert len(parts) == len(mapped)
        for part, ipa in zip(parts, mapped):
            chosen = _distance(part, _by_ipa(targets, ipa), schema)
            assert chosen == min(_distance(part, target, schema)
                                 for target in targets)


def test_mapping_permuted_targets(fixture_db):
    """Test the target order never changes a mapping."""
    schema = fixture_db.schema
    rng = np.random.default_rng(13)
    targets = _random_segments(rng, schema, 30, 't', complex_every=4)
    sources = _random_segments(rng, schema, 20, 's', complex_every=3) + \
        targets[:3]
    expected = map_inventory(sources, Inventory('zzz', phonemes=targets),
                             fixture_db)
    for _ in range(10):
        permuted = [targets[index] for index in rng.permutation(30)]
        assert map_inventory(
            sources, Inventory('zzz', phonemes=permuted),
            fixture_db) == expected


def test_coverage_monotonic(fixture_db):
    """Test coverage grows with the sources and bounds step 1 coverage."""
    schema = fixture_db.schema
    rng = np.random.default_rng(17)
    for _ in range(10):
        targets = _random_segments(rng, schema, 15, 't', complex_every=4)
        sources = _random_segments(rng, schema, 10, 's', complex_every=3) \
            + [targets[index] for index in rng.permutation(15)[:5]]
        sources = [sources[index] for index in
                   rng.permutation(len(sources))]
        target = Inventory('zzz', phonemes=targets)
        previous = 0.0
        for end in range(1, len(sources) + 1):
            result = map_inventory(sources[:end], target, fixture_db)
            assert result.coverage >= previous
            assert result.retained_coverage <= result.coverage
            previous = result.coverage


def test_split_ignores_excluded_contours(fixture_db):
    """Test contours of excluded attributes never block a split."""
    schema = fixture_db.schema
    affricate = fixture_db.segment('t͡s').with_ipa('t͡s˥˩')
    affricate.attributes['tone'] = Contour.parse('+,-,0')
    parts = split_segment(affricate, schema)
    assert len(parts) == 2
    assert all(part.contour('tone') == Contour.parse('+') for part in parts)
    result = map_inventory([affricate], fixture_db.inventory('aaa'),
                           fixture_db)
    assert result.pairs == {'t͡s˥˩': ['t', 's']}
    assert result.unmapped == set()
