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

"""Test the phoneme recognizer variants."""

import numpy as np
import pytest

from rero_phonrec.features.api import AttributeValue, Inventory, Segment
from rero_phonrec.model.api import VARIANT_WIRING, PhonemeRecognizer, \
    PhoneSpace, VariantConfig, attribute_targets, parse_zeroed, \
    shuffled_control, shuffled_inventory, zero_shot_rebind
from rero_phonrec.model.checks import micro_batch, micro_config
from rero_phonrec.model.layers import ModelError
from rero_phonrec.numerics.optim import Adam
from rero_phonrec.training.records import Utterance


def _model(micro_db, variant='multi-task', seed=0):
    return PhonemeRecognizer(micro_config(variant), micro_db, ['aaa', 'bbb'],
                             seed=seed)


def test_variant_config():
    """Test variant names and run configuration values."""
    with pytest.raises(ValueError):
        VariantConfig(variant='transformer')
    config = VariantConfig.from_run_config(
        {'variant': 'baseline', 'hidden_dim': 7, 'seed': 3}, input_dim=6)
    assert (config.variant, config.hidden_dim, config.input_dim) == \
        ('baseline', 7, 6)
    assert config.to_dict()['hidden_dim'] == 7
    assert parse_zeroed(['stress:+', 'nasal:0']) == [
        ('stress', AttributeValue.PLUS), ('nasal', AttributeValue.ZERO)]


def test_phone_space(fixture_db):
    """Test phone indices and allophone groups."""
    inventories = [fixture_db.inventory('aaa'), fixture_db.inventory('bbb')]
    space = PhoneSpace.build(fixture_db, inventories)
    assert space.ipas == ['p', 't', 'tʰ', 'k', 's', 'm', 'a', 'i', 'd',
                          't͡s', 'n', 'ai']
    assert space.groups['aaa'] == [[0], [1, 2], [3], [4], [5], [6], [7]]
    assert space.groups['bbb'] == [[1], [8], [9], [10], [6], [6, 11], [7]]
    assert space.language_targets('bbb', ['ai', 't']) == [5, 0]
    with pytest.raises(ModelError.UnknownSegment):
        space.language_targets('aaa', ['d'])
    with pytest.raises(ModelError.UnknownSegment):
        space.language_targets('zzz', ['d'])

    shared = PhoneSpace.build(fixture_db, inventories, allophones=False)
    assert len(shared) == 11
    assert shared.groups['aaa'][1] == [1]
    assert shared.shared_targets('bbb', ['ai']) == [10]

    broken = Inventory('ccc', phonemes=[fixture_db.segment('t')],
                       allophones={'t': ['t', 'tʲ']})
    with pytest.raises(ModelError.UnknownSegment):
        PhoneSpace.build(fixture_db, [broken])


def test_attribute_targets(fixture_db):
    """Test contours add tokens to their attribute sequence only."""
    segments = [fixture_db.segment('t͡s'), fixture_db.segment('a')]
    targets = attribute_targets(segments, fixture_db.schema)
    assert targets['continuant'] == [
        AttributeValue.MINUS, AttributeValue.PLUS, AttributeValue.PLUS]
    assert len(targets['nasal']) == 2
    assert 'tone' not in targets


def test_variant_wiring(micro_db):
    """Test parameters and phone spaces of every variant."""
    for variant, (allophones, heads, hierarchical) in VARIANT_WIRING.items():
        model = _model(micro_db, variant)
        assert model.config.uses_allophone_layer == allophones
        assert ('heads.weight' in model.store) == heads
        assert len(model.space) == (12 if allophones else 11)
        width = model.bounds[-1][1] if heads else 0
        assert model.store['projection.weight'].shape == (
            5 + (width if hierarchical else 0), 4)
        assert model.store.is_frozen_zero('embedding.spreadGlottis.+')
        assert 'spreadGlottis:+' in model.config.zeroed


def test_head_alphabets(micro_db):
    """Test attribute heads predict attested values and a blank."""
    model = _model(micro_db)
    assert model.alphabets['continuant'] == [
        AttributeValue.PLUS, AttributeValue.MINUS]
    assert model.alphabets['delayedRelease'] == list(AttributeValue)
    assert len(model.bounds) == 12
    start, end = model.bounds[micro_db.schema.effective.index('continuant')]
    assert end - start == 3


def test_losses(micro_db, rng):
    """Test the total loss is the weighted sum of the head losses."""
    batch = micro_batch(rng)
    model = _model(micro_db)
    total, heads = model.utterance_loss(batch[1], train_flag=False)
    attributes = sum(heads[name] for name in micro_db.schema.effective)
    assert total.item() == pytest.approx(
        heads['phoneme'] + model.config.attribute_weight * attributes,
        rel=1e-12)
    report = model.forward_loss(batch, train_flag=False)
    assert report.used == 2
    assert set(report.heads) == {'phoneme'} | set(micro_db.schema.effective)

    baseline = _model(micro_db, 'baseline')
    report = baseline.forward_loss(batch, train_flag=False)
    assert list(report.heads) == ['phoneme']
    assert report.total.item() == pytest.approx(report.heads['phoneme'])


def test_skipped_utterances(micro_db, rng):
    """Test utterances too short for their targets are skipped."""
    model = _model(micro_db)
    batch = [
        Utterance(id='short', language_id='aaa', phonemes=['p', 'a', 't'],
                  data=rng.normal(size=(3, 4))),
        Utterance(id='tiny', language_id='aaa', phonemes=['p'],
                  data=rng.normal(size=(1, 4))),
    ]
    report = model.forward_loss(batch)
    assert report.total is None
    assert report.skipped == ['short', 'tiny']
    unknown = Utterance(id='x', language_id='aaa', phonemes=['d'],
                        data=rng.normal(size=(8, 4)))
    with pytest.raises(ModelError.UnknownSegment):
        model.forward_loss([unknown])


def test_overfit(micro_db, rng):
    """Test the loss decreases on a fixed batch."""
    batch = micro_batch(rng)
    model = _model(micro_db, 'multi-task-hierarchy')
    optimizer = Adam(model.store)
    losses = []
    for _ in range(40):
        model.store.zero_grad()
        report = model.forward_loss(batch, train_flag=False)
        report.total.backward()
        optimizer.step(0.05)
        losses.append(report.total.item())
    assert losses[-1] < losses[0]


def test_decode(micro_db, rng):
    """Test greedy decoding within an inventory."""
    frames = rng.normal(size=(8, 4))
    model = _model(micro_db)
    hypothesis = model.decode(frames, 'bbb')
    assert set(hypothesis) <= set(micro_db.inventory('bbb').phoneme_ipas)
    attributes = model.decode_attributes(frames)
    assert list(attributes) == list(micro_db.schema.effective)
    assert all(set(labels) <= {'+', '-', '0'}
               for labels in attributes.values())
    assert _model(micro_db, 'baseline').decode_attributes(frames) is None
    with pytest.raises(ModelError.UnknownSegment):
        model.decode(frames, 'zzz')


def test_rebind(micro_db, rng):
    """Test rebinding shares parameters and recomposes embeddings."""
    frames = rng.normal(size=(8, 4))
    model = _model(micro_db)
    same = model.rebind([micro_db.inventory('aaa'),
                         micro_db.inventory('bbb')])
    assert same.store is model.store
    assert np.array_equal(same.forward(frames).phone_logits.data,
                          model.forward(frames).phone_logits.data)

    embeddings = model.embeddings().data
    ipas = model.space.ipas
    assert np.array_equal(embeddings[ipas.index('a')],
                          embeddings[ipas.index('ai')])

    new = Inventory('ccc', phonemes=[micro_db.segment('tʰ'),
                                     micro_db.segment('a')])
    rebound = zero_shot_rebind(model, [new], micro_db)
    assert rebound.space.phonemes['ccc'] == ['tʰ', 'a']
    assert model.space.ipas == ipas
    assert set(rebound.decode(frames, 'ccc')) <= {'tʰ', 'a'}
    assert zero_shot_rebind(model, ['aaa'], micro_db).space.ipas == \
        model.space.ipas
    unknown = Inventory('ddd', phonemes=[Segment('q', {})])
    with pytest.raises(ModelError.UnknownSegment):
        zero_shot_rebind(model, [unknown], micro_db)


def test_metadata(micro_db):
    """Test a recognizer is rebuilt from its metadata."""
    model = _model(micro_db, 'multi-task-hierarchy')
    rebuilt = PhonemeRecognizer.from_metadata(model.metadata(), micro_db)
    assert rebuilt.config == model.config
    assert [(name, tensor.shape) for name, tensor in rebuilt.store.items()] \
        == [(name, tensor.shape) for name, tensor in model.store.items()]
    assert rebuilt.training_languages == ['aaa', 'bbb']


def test_config_left_untouched(micro_db):
    """Test the missing value defaults go to a copy of the config."""
    config = micro_config('multi-task')
    model = PhonemeRecognizer(config, micro_db, ['aaa'])
    assert config.zeroed is None
    assert model.config.zeroed
    assert model.config.variant == config.variant
    explicit = micro_config('multi-task', zeroed=['nasal:+'])
    assert PhonemeRecognizer(explicit, micro_db, ['aaa']).config.zeroed == \
        ['nasal:+']


def test_shuffled_inventory(micro_db):
    """Test every phoneme takes the attributes of another one."""
    inventory = micro_db.inventory('aaa')
    for seed in range(5):
        shuffled = shuffled_inventory(inventory, seed)
        assert shuffled.phoneme_ipas == inventory.phoneme_ipas
        assert shuffled.allophones == inventory.allophones
        for original, phoneme in zip(inventory.phonemes, shuffled.phonemes):
            assert phoneme.attributes != original.attributes
            assert phoneme.attributes in [
                other.attributes for other in inventory.phonemes]
    single = Inventory('one', phonemes=[micro_db.segment('a')])
    assert shuffled_inventory(single).phonemes[0].attributes == \
        micro_db.segment('a').attributes


def test_shuffled_control(micro_db, rng):
    """Test the control composes embeddings from shuffled attributes."""
    model = _model(micro_db)
    control = shuffled_control(model, ['aaa'], micro_db, seed=3)
    assert list(control.space.phonemes) == ['aaa']
    assert control.store is model.store
    shuffled = shuffled_inventory(micro_db.inventory('aaa'), 3)
    inventory = micro_db.inventory('aaa')
    embeddings = model.embeddings().data
    control_embeddings = control.embeddings().data
    for phoneme in shuffled.phonemes:
        source = next(other for other in inventory.phonemes
                      if other.attributes == phoneme.attributes)
        assert np.array_equal(
            control_embeddings[control.space.ipas.index(phoneme.ipa)],
            embeddings[model.space.ipas.index(source.ipa)])
    hypothesis = control.decode(rng.normal(size=(8, 4)), 'aaa')
    assert set(hypothesis) <= set(inventory.phoneme_ipas)
