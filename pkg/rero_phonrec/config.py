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

"""Default configuration for RERO PHONREC.

You overwrite and set run-specific configuration by either:

- Configuration file: YAML key-value file given with ``--config``
- Command line flags: they take precedence over the configuration file
"""

from __future__ import absolute_import, print_function

import yaml

# Feature database
# ================
#: Articulatory attribute columns of the bundled feature database, in
#: column order.
FEATURES_ATTRIBUTES = [
    'tone', 'stress', 'syllabic', 'long', 'consonantal', 'sonorant',
    'continuant', 'delayedRelease', 'approximant', 'tap', 'trill', 'nasal',
    'lateral', 'labial', 'round', 'labiodental', 'coronal', 'anterior',
    'distributed', 'strident', 'dorsal', 'high', 'low', 'front', 'back',
    'tense', 'retractedTongueRoot', 'advancedTongueRoot',
    'periodicGlottalSource', 'epilaryngealSource', 'spreadGlottis',
    'constrictedGlottis', 'fortis', 'raisedLarynxEjective',
    'loweredLarynxEjective', 'click'
]
#: Attributes kept in the database but ignored by every algorithm.
FEATURES_EXCLUDED = ['tone']
#: Attribute carrying the stress exception (only ``-`` or ``0`` expected).
FEATURES_STRESS_ATTRIBUTE = 'stress'
#: Non feature columns of PHOIBLE style CSV files.
FEATURES_META_COLUMNS = [
    'InventoryID', 'Glottocode', 'ISO6393', 'LanguageName',
    'SpecificDialect', 'GlyphID', 'Phoneme', 'Allophones', 'Marginal',
    'SegmentClass', 'Source'
]
#: Turn dangling allophones into parse errors.
FEATURES_STRICT = False

# Inventory mapping
# =================
#: Separator for synthesized sub-segment IPA strings.
MAPPING_SUBSEGMENT_SEPARATOR = '#'

# Model
# =====
#: Version of the model and run configuration schema.
CONFIG_SCHEMA_VERSION = 1
#: Architecture variant.
MODEL_VARIANT = 'multi-task'
#: Composition embedding size (desk scale).
MODEL_EMBEDDING_DIM = 64
#: Composition embedding size used at full scale.
MODEL_FULL_EMBEDDING_DIM = 640
#: Dropout after the final encoder layer.
MODEL_DROPOUT = 0.2
#: Hidden size of the toy acoustic encoder.
MODEL_HIDDEN_DIM = 96
#: Number of feed-forward layers after the convolution front-end.
MODEL_LAYERS = 1
#: Temporal context of the convolution front-end.
MODEL_CONV_CONTEXT = 3
#: Stride of the convolution front-end.
MODEL_CONV_STRIDE = 1
#: Weight of every attribute CTC loss.
MODEL_ATTRIBUTE_WEIGHT = 1.0
#: Standard deviation of the parameter initialisation.
MODEL_INIT_SCALE = 0.1

# Training
# ========
#: Peak learning rate.
TRAINING_PEAK_LR = 1e-3
#: Linear warmup steps.
TRAINING_WARMUP_STEPS = 100
#: Constant learning rate steps after the warmup.
TRAINING_CONSTANT_STEPS = 400
#: Number of optimizer updates.
TRAINING_MAX_STEPS = 2000
#: Maximal padded batch matrix size in feature elements.
TRAINING_ELEMENT_BUDGET = 20000
#: Language upsampling exponent.
TRAINING_UPSAMPLING_ALPHA = 0.5
#: Write a checkpoint every N steps (0 disables).
TRAINING_CHECKPOINT_EVERY = 500
#: Evaluate on the development split every N steps (0 disables).
TRAINING_EVAL_EVERY = 0
#: Freeze the convolution front-end.
TRAINING_FREEZE_FRONTEND = False
#: Adam hyper parameters.
TRAINING_ADAM_BETAS = (0.9, 0.999)
TRAINING_ADAM_EPSILON = 1e-8

# Synthetic data
# ==============
#: Standard deviation of the frame noise.
SYNTH_NOISE = 0.1
#: Feature frame dimension.
SYNTH_FRAME_DIM = 24
#: Frames emitted per (sub-)segment, inclusive bounds.
SYNTH_FRAMES_PER_SEGMENT = (2, 5)

# Evaluation
# ==========
#: Version of the per-language CSV layout.
EVALUATION_CSV_VERSION = 1
#: Per-language CSV columns.
EVALUATION_CSV_COLUMNS = ['language', 'family', 'hours', 'utterances', 'per',
                          'aer']

# Logging
# =======
#: Name of the run logger, parent of every module logger.
LOGGER_NAME = 'rero_phonrec'
#: Tab separated run log lines: identifier, level, code, message.
LOGGER_FORMAT = '%(id)12s\t%(levelname)8s\t%(error)20s\t%(message)s'

# Command line
# ============
#: Default random seed.
RUN_SEED = 0
#: Number of evaluation workers.
RUN_WORKERS = 1

#: Full scale settings, selectable with ``--preset full``.
FULL_PRESET = {
    'embedding_dim': MODEL_FULL_EMBEDDING_DIM,
    'warmup_steps': 2500,
    'constant_steps': 10000,
    'element_budget': 16000000,
    'max_steps': 30000,
}

#: Run configuration defaults, keys as used in configuration files.
RUN_DEFAULTS = {
    'schema_version': CONFIG_SCHEMA_VERSION,
    'seed': RUN_SEED,
    'workers': RUN_WORKERS,
    'variant': MODEL_VARIANT,
    'embedding_dim': MODEL_EMBEDDING_DIM,
    'hidden_dim': MODEL_HIDDEN_DIM,
    'layers': MODEL_LAYERS,
    'conv_context': MODEL_CONV_CONTEXT,
    'conv_stride': MODEL_CONV_STRIDE,
    'dropout': MODEL_DROPOUT,
    'attribute_weight': MODEL_ATTRIBUTE_WEIGHT,
    'init_scale': MODEL_INIT_SCALE,
    'peak_lr': TRAINING_PEAK_LR,
    'warmup_steps': TRAINING_WARMUP_STEPS,
    'constant_steps': TRAINING_CONSTANT_STEPS,
    'max_steps': TRAINING_MAX_STEPS,
    'element_budget': TRAINING_ELEMENT_BUDGET,
    'upsampling_alpha': TRAINING_UPSAMPLING_ALPHA,
    'checkpoint_every': TRAINING_CHECKPOINT_EVERY,
    'eval_every': TRAINING_EVAL_EVERY,
    'freeze_frontend': TRAINING_FREEZE_FRONTEND,
    'excluded_attributes': FEATURES_EXCLUDED,
    'strict': FEATURES_STRICT,
}


class RunConfig(dict):
    """Fully resolved run configuration.

    Resolution order: defaults, then the configuration file, then flags.
    """

    @classmethod
    def load(cls, config_file=None, preset=None, **flags):
        """Resolve a configuration.

        :param config_file: YAML file handle or path, optional.
        :param preset: name of a preset (``full``), optional.
        :param flags: command line values, ``None`` values are ignored.
        :return: RunConfig
        """
        data = dict(RUN_DEFAULTS)
        if preset == 'full':
            data.update(FULL_PRESET)
        elif preset:
            raise ValueError(f'Unknown preset: {preset}')
        if config_file:
            if isinstance(config_file, str):
                with open(config_file, encoding='utf-8') as handle:
                    from_file = yaml.safe_load(handle) or {}
            else:
                from_file = yaml.safe_load(config_file) or {}
            unknown = set(from_file) - set(RUN_DEFAULTS)
            if unknown:
                names = ', '.join(sorted(unknown))
                raise ValueError(f'Unknown configuration keys: {names}')
            data.update(from_file)
        data.update({key: value for key, value in flags.items()
                     if value is not None})
        return cls(data)

    def dump(self, file_name):
        """Write the configuration verbatim as YAML."""
        with open(file_name, 'w', encoding='utf-8') as handle:
            yaml.safe_dump(self.to_plain(), handle, sort_keys=True,
                           allow_unicode=True)

    def to_plain(self):
        """Plain python structure suitable for YAML and JSON."""
        plain = {}
        for key, value in self.items():
            if isinstance(value, (tuple, set)):
                value = sorted(value) if isinstance(value, set) \
                    else list(value)
            plain[key] = value
        return plain
