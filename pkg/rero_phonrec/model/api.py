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

"""Phoneme recognizer with composed phoneme embeddings.

Five variants are available, see :data:`VARIANT_WIRING`.
"""

import copy
import logging
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .layers import AttributeEmbeddingTable, ModelError, allophone_layer, \
    attribute_heads, attribute_probabilities, compose_embeddings, \
    conv_output_length, ctc_loss_sum, encode, init_weight, phone_logits
from ..config import MODEL_ATTRIBUTE_WEIGHT, MODEL_CONV_CONTEXT, \
    MODEL_CONV_STRIDE, MODEL_DROPOUT, MODEL_EMBEDDING_DIM, \
    MODEL_HIDDEN_DIM, MODEL_INIT_SCALE, MODEL_LAYERS, MODEL_VARIANT
from ..ctc import CtcError, greedy_decode, required_frames
from ..features.api import AttributeValue, FeatureDbError, Inventory, \
    Segment, attribute_alphabets, missing_attribute_values
from ..numerics.ops import log_softmax, weighted_sum
from ..numerics.tensor import ParamStore, constant
from ..utils import get_rng

LOGGER = logging.getLogger(__name__)

#: Variant name to (allophone layer, attribute heads, hierarchical input).
VARIANT_WIRING = {
    'baseline': (True, False, False),
    'baseline-shared': (False, False, False),
    'multi-task-shared': (False, True, False),
    'multi-task': (True, True, False),
    'multi-task-hierarchy': (True, True, True),
}


@dataclass
class VariantConfig:
    """Architecture of a recognizer."""

    variant: str = MODEL_VARIANT
    input_dim: int = 24
    embedding_dim: int = MODEL_EMBEDDING_DIM
    hidden_dim: int = MODEL_HIDDEN_DIM
    layers: int = MODEL_LAYERS
    conv_context: int = MODEL_CONV_CONTEXT
    conv_stride: int = MODEL_CONV_STRIDE
    dropout: float = MODEL_DROPOUT
    attribute_weight: float = MODEL_ATTRIBUTE_WEIGHT
    init_scale: float = MODEL_INIT_SCALE
    #: ``attribute:value`` strings, ``None`` for values missing from the
    #: training languages.
    zeroed: list = None

    def __post_init__(self):
        """Check the variant name."""
        if self.variant not in VARIANT_WIRING:
            raise ValueError(
                f'Unknown variant {self.variant}, use one of '
                f'{", ".join(VARIANT_WIRING)}')

    @property
    def uses_allophone_layer(self):
        """Language specific phoneme outputs pooled from allophones."""
        return VARIANT_WIRING[self.variant][0]

    @property
    def has_attribute_heads(self):
        """Supervised attribute classifiers."""
        return VARIANT_WIRING[self.variant][1]

    @property
    def hierarchical(self):
        """Attribute distributions feed the projection."""
        return VARIANT_WIRING[self.variant][2]

    @classmethod
    def from_run_config(cls, run_config, input_dim):
        """Variant configuration from a RunConfig."""
        keys = ('variant', 'embedding_dim', 'hidden_dim', 'layers',
                'conv_context', 'conv_stride', 'dropout',
                'attribute_weight', 'init_scale')
        return cls(input_dim=input_dim,
                   **{key: run_config[key] for key in keys
                      if key in run_config})

    def to_dict(self):
        """Plain mapping for checkpoint metadata."""
        return asdict(self)


@dataclass
class PhoneSpace:
    """Phones scored at the output and per language pooling groups."""

    phones: list = field(default_factory=list)
    phonemes: dict = field(default_factory=dict)
    groups: dict = field(default_factory=dict)

    @classmethod
    def build(cls, database, inventories, allophones=True):
        """Space over the phonemes, or allophones, of inventories.

        :param database: FeatureDatabase resolving allophone segments.
        :param inventories: Inventory list, the order fixes phone indices.
        :param allophones: score allophones and pool them per phoneme.
        """
        space = cls()
        positions = {}

        def position(segment):
            if segment.ipa not in positions:
                positions[segment.ipa] = len(space.phones)
                space.phones.append(segment)
            return positions[segment.ipa]

        for inventory in inventories:
            groups = []
            for phoneme in inventory.phonemes:
                if not allophones:
                    groups.append([position(phoneme)])
                    continue
                group = []
                for ipa in inventory.allophones_of(phoneme.ipa):
                    if ipa == phoneme.ipa:
                        group.append(position(phoneme))
                        continue
                    try:
                        group.append(position(database.segment(ipa)))
                    except FeatureDbError.UnknownSegment:
                        raise ModelError.UnknownSegment(
                            f'{inventory.language_id}: no feature row for '
                            f'allophone {ipa}')
                groups.append(sorted(set(group)))
            space.phonemes[inventory.language_id] = inventory.phoneme_ipas
            space.groups[inventory.language_id] = groups
        return space

    @property
    def ipas(self):
        """IPA strings of the phones."""
        return [phone.ipa for phone in self.phones]

    def __len__(self):
        """Number of phones."""
        return len(self.phones)

    def language_targets(self, language_id, ipas):
        """Positions of phonemes in a language inventory."""
        phonemes = self._phonemes(language_id)
        try:
            return [phonemes.index(ipa) for ipa in ipas]
        except ValueError:
            raise ModelError.UnknownSegment(
                f'{language_id}: transcription outside of the inventory: '
                f'{" ".join(ipas)}')

    def shared_targets(self, language_id, ipas):
        """Phone indices of phonemes in the whole space."""
        groups = self.groups[language_id]
        return [groups[index][0]
                for index in self.language_targets(language_id, ipas)]

    def _phonemes(self, language_id):
        try:
            return self.phonemes[language_id]
        except KeyError:
            raise ModelError.UnknownSegment(
                f'Language not in the phone space: {language_id}')


def attribute_targets(phonemes, schema):
    """Attribute label sequences with full contours.

    :param phonemes: sequence of Segment.
    :return: attribute name to list of AttributeValue, lengths may differ.
    """
    return {name: [value for phoneme in phonemes
                   for value in phoneme.attributes[name].values]
            for name in schema.effective}


def parse_zeroed(items):
    """(attribute, AttributeValue) pairs from ``attribute:value`` strings."""
    pairs = []
    for item in items:
        attribute, _, value = item.rpartition(':')
        pairs.append((attribute, AttributeValue.parse(value)))
    return pairs


@dataclass
class LossReport:
    """Batch loss with the mean per head losses."""

    total: object = None
    heads: dict = field(default_factory=dict)
    used: int = 0
    skipped: list = field(default_factory=list)


@dataclass
class Output:
    """Forward pass of one utterance."""

    phone_logits: object
    head_log_probs: object = None


class PhonemeRecognizer(object):
    """Acoustic encoder scoring phones by composed attribute embeddings."""

    def __init__(self, config, database, training_languages, seed=0):
        """Constructor.

        :param config: VariantConfig.
        :param database: FeatureDatabase with the training inventories.
        :param training_languages: language identifiers.
        :param seed: initialisation seed.
        """
        self.config = config
        self.database = database
        self.schema = database.schema
        self.training_languages = list(training_languages)
        inventories = [database.inventory(language_id)
                       for language_id in self.training_languages]
        if config.zeroed is None:
            config = replace(config, zeroed=[
                f'{name}:{value.label}' for name, value in
                missing_attribute_values(database, self.training_languages)])
            self.config = config
        self.alphabets = {}
        self.bounds = []
        if config.has_attribute_heads:
            self.alphabets = attribute_alphabets(
                [phoneme for inventory in inventories
                 for phoneme in inventory.phonemes], self.schema)
            start = 0
            for name in self.schema.effective:
                end = start + len(self.alphabets[name]) + 1
                self.bounds.append((start, end))
                start = end
        self.store = ParamStore()
        rng = get_rng(seed)
        self.table = AttributeEmbeddingTable(
            self.store, self.schema, config.embedding_dim, rng,
            config.init_scale, parse_zeroed(config.zeroed))
        self._register_encoder(rng)
        self.space = PhoneSpace.build(database, inventories,
                                      config.uses_allophone_layer)

    def _register_encoder(self, rng):
        config = self.config
        scale = config.init_scale
        hidden = config.hidden_dim
        register = self.store.register
        register('encoder.conv.weight', init_weight(
            rng, config.conv_context * config.input_dim, hidden, scale))
        register('encoder.conv.bias', np.zeros(hidden))
        for layer in range(config.layers):
            register(f'encoder.layer{layer}.weight',
                     init_weight(rng, hidden, hidden, scale))
            register(f'encoder.layer{layer}.bias', np.zeros(hidden))
        if self.bounds:
            width = self.bounds[-1][1]
            register('heads.weight', init_weight(rng, hidden, width, scale))
            register('heads.bias', np.zeros(width))
        projection_input = hidden
        if config.hierarchical:
            projection_input += self.bounds[-1][1]
        register('projection.weight', init_weight(
            rng, projection_input, config.embedding_dim, scale))
        register('projection.bias', np.zeros(config.embedding_dim))

    def freeze_frontend(self, frozen=True):
        """Stop or resume updates of the convolution front-end."""
        for name in ('encoder.conv.weight', 'encoder.conv.bias'):
            self.store.set_trainable(name, not frozen)

    def embeddings(self):
        """Composed embeddings of the phone space, [P, D]."""
        return compose_embeddings(self.space.phones, self.table)

    def forward(self, frames, rng=None, train_flag=False):
        """Phone logits and attribute log distributions of frames."""
        hidden = encode(self.store, constant(frames), self.config, rng,
                        train_flag)
        head_log_probs = attr_probs = None
        if self.bounds:
            logits, head_log_probs = attribute_heads(
                self.store, hidden, self.bounds)
            if self.config.hierarchical:
                attr_probs = attribute_probabilities(logits, self.bounds)
        return Output(
            phone_logits=phone_logits(self.store, hidden, self.embeddings(),
                                      self.table.blank, attr_probs),
            head_log_probs=head_log_probs)

    def language_logits(self, phone_logits, language_id):
        """Phoneme and blank logits of one language inventory."""
        if language_id not in self.space.groups:
            raise ModelError.UnknownSegment(
                f'Language not in the phone space: {language_id}')
        return allophone_layer(phone_logits, self.space.groups[language_id])

    def attribute_targets(self, ipas):
        """Attribute label id sequences of a transcription."""
        segments = [self._segment(ipa) for ipa in ipas]
        targets = attribute_targets(segments, self.schema)
        return [[self.alphabets[name].index(value)
                 for value in targets[name]]
                for name in self.schema.effective]

    def _segment(self, ipa):
        try:
            return self.database.segment(ipa)
        except FeatureDbError.UnknownSegment:
            raise ModelError.UnknownSegment(f'No feature row: {ipa}')

    def utterance_loss(self, utterance, rng=None, train_flag=True):
        """Total and per head CTC losses of one utterance.

        :raises CtcError.TargetTooLong: when some target does not fit the
            encoder output.
        """
        frames = utterance.frames
        config = self.config
        if frames.shape[0] < config.conv_context:
            raise ModelError.TooShort(f'{utterance.id}: too few frames')
        length = conv_output_length(
            frames.shape[0], config.conv_context, config.conv_stride)
        if config.uses_allophone_layer:
            target = self.space.language_targets(
                utterance.language_id, utterance.phonemes)
        else:
            target = self.space.shared_targets(
                utterance.language_id, utterance.phonemes)
        head_targets = self.attribute_targets(utterance.phonemes) \
            if self.bounds else []
        needed = max([required_frames(target)] +
                     [required_frames(labels) for labels in head_targets])
        if needed > length:
            raise CtcError.TargetTooLong(
                f'{utterance.id}: {length} frames for {needed}')
        output = self.forward(frames, rng, train_flag)
        logits = output.phone_logits
        if config.uses_allophone_layer:
            logits = self.language_logits(logits, utterance.language_id)
        log_probs = log_softmax(logits)
        phoneme_loss, losses = ctc_loss_sum(
            log_probs, [(0, log_probs.shape[1])], [target], [1.0])
        heads = {'phoneme': float(losses[0])}
        terms = [phoneme_loss]
        if self.bounds:
            attribute_loss, losses = ctc_loss_sum(
                output.head_log_probs, self.bounds, head_targets,
                [config.attribute_weight] * len(self.bounds))
            terms.append(attribute_loss)
            heads.update(zip(self.schema.effective, map(float, losses)))
        return weighted_sum(terms), heads

    def forward_loss(self, batch, rng=None, train_flag=True):
        """Mean loss over the utterances of a batch.

        Utterances whose targets do not fit are skipped and counted.

        :return: LossReport, ``total`` is ``None`` when every utterance
            was skipped.
        """
        report = LossReport()
        totals = []
        for utterance in batch:
            try:
                total, heads = self.utterance_loss(utterance, rng,
                                                   train_flag)
            except (CtcError.TargetTooLong, ModelError.TooShort) as error:
                LOGGER.warning('skip utterance %s: %s', utterance.id, error)
                report.skipped.append(utterance.id)
                continue
            totals.append(total)
            for name, value in heads.items():
                report.heads[name] = report.heads.get(name, 0.0) + value
        report.used = len(totals)
        if totals:
            report.total = weighted_sum(totals, [1.0 / len(totals)] *
                                        len(totals))
            report.heads = {name: value / len(totals)
                            for name, value in report.heads.items()}
        return report

    def decode(self, frames, language_id):
        """Greedy phoneme decoding within a language inventory.

        :return: IPA strings.
        """
        output = self.forward(frames)
        logits = self.language_logits(output.phone_logits, language_id)
        phonemes = self.space.phonemes[language_id]
        return [phonemes[label] for label in greedy_decode(logits.data)]

    def decode_attributes(self, frames):
        """Greedy decoding of every attribute head.

        :return: attribute name to value label list, ``None`` without
            attribute heads.
        """
        if not self.bounds:
            return None
        log_probs = self.forward(frames).head_log_probs.data
        return {
            name: [self.alphabets[name][label].label for label in
                   greedy_decode(log_probs[:, start:end])]
            for name, (start, end) in zip(self.schema.effective, self.bounds)
        }

    def rebind(self, inventories, database=None):
        """Recognizer sharing the parameters over another phone space."""
        rebound = copy.copy(self)
        rebound.database = database or self.database
        rebound.space = PhoneSpace.build(
            rebound.database, inventories, self.config.uses_allophone_layer)
        return rebound

    def metadata(self):
        """Everything but the parameters needed to rebuild the model."""
        return {
            'config': self.config.to_dict(),
            'training_languages': self.training_languages,
            'parameters': [[name, list(tensor.shape)]
                           for name, tensor in self.store.items()],
        }

    @classmethod
    def from_metadata(cls, metadata, database):
        """Recognizer with fresh parameters from checkpoint metadata."""
        return cls(VariantConfig(**metadata['config']), database,
                   metadata['training_languages'])


def zero_shot_rebind(model, new_inventories, db):
    """Rebind a recognizer to the training and some new inventories.

    Embeddings are recomposed from the attribute values of the union of
    training and new phonemes, parameters are untouched.

    :param new_inventories: Inventory objects or language identifiers.
    """
    inventories = {}
    for language_id in model.training_languages:
        try:
            inventories[language_id] = db.inventory(language_id)
        except FeatureDbError.UnknownLanguage:
            inventories[language_id] = model.database.inventory(language_id)
    for inventory in new_inventories:
        if isinstance(inventory, str):
            inventory = db.inventory(inventory)
        for phoneme in inventory.phonemes:
            if phoneme.ipa not in db.segments and \
                    phoneme.ipa not in model.database.segments:
                raise ModelError.UnknownSegment(
                    f'No feature row: {phoneme.ipa}')
        inventories[inventory.language_id] = inventory
    return model.rebind(list(inventories.values()), db)


def shuffled_inventory(inventory, seed=0):
    """Inventory whose phonemes trade attribute vectors among themselves.

    Every phoneme of an inventory with two phonemes or more ends up with the
    attributes of another one; allophones are kept as they are.

    :param inventory: Inventory.
    :param seed: random seed of the permutation.
    :return: Inventory
    """
    rng = get_rng(seed)
    phonemes = inventory.phonemes
    identity = np.arange(len(phonemes))
    order = identity
    while len(phonemes) > 1 and (order == identity).any():
        order = rng.permutation(len(phonemes))
    return Inventory(
        language_id=inventory.language_id,
        phonemes=[
            Segment(ipa=phoneme.ipa,
                    attributes=dict(phonemes[source].attributes),
                    segment_class=phonemes[source].segment_class)
            for phoneme, source in zip(phonemes, order)],
        allophones=dict(inventory.allophones), name=inventory.name,
        inventory_id=inventory.inventory_id)


def shuffled_control(model, inventories, db, seed=0):
    """Recognizer bound to inventories with shuffled attribute vectors.

    The phone space holds the shuffled inventories only, so their phonemes
    never share a phone with a training phoneme of the same IPA string.
    Decoding the rebound languages scores what composition gives without
    the right attributes.

    :param inventories: Inventory objects or language identifiers.
    :param seed: random seed of the permutations.
    """
    shuffled = []
    for number, inventory in enumerate(inventories):
        if isinstance(inventory, str):
            inventory = db.inventory(inventory)
        shuffled.append(shuffled_inventory(inventory, seed + number))
    return model.rebind(shuffled, db)
