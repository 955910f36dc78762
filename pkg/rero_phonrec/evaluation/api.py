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

"""Edit distances, error rates and evaluation reports."""

import csv
import io
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.stats as st

from ..config import EVALUATION_CSV_COLUMNS, EVALUATION_CSV_VERSION
from ..features.api import FeatureDbError
from ..model.api import attribute_targets, shuffled_control, \
    zero_shot_rebind
from ..model.layers import ModelError

LOGGER = logging.getLogger(__name__)

#: Errors of one utterance, counted in the report instead of raised.
UTTERANCE_ERRORS = (ModelError.UnknownSegment, FeatureDbError.UnknownSegment)


class EvaluationError:
    """Base class for errors in evaluation."""

    class EmptyLanguage(Exception):
        """Language without reference tokens."""

    class NoAttributeHeads(Exception):
        """Recognizer without attribute classifiers."""

    class DegenerateInput(Exception):
        """Too few or constant values."""


@dataclass
class EditResult:
    """Levenshtein distance with its alignment counts."""

    distance: int = 0
    substitutions: int = 0
    insertions: int = 0
    deletions: int = 0
    reference_length: int = 0


def edit_distance(ref, hyp):
    """Minimal substitutions, insertions and deletions turning ref into hyp.

    The alignment prefers substitutions, then insertions, then deletions.

    >>> edit_distance('abc', 'ac').deletions
    1
    """
    ref, hyp = list(ref), list(hyp)
    rows, cols = len(ref) + 1, len(hyp) + 1
    cost = np.zeros((rows, cols), dtype=np.int64)
    cost[:, 0] = np.arange(rows)
    cost[0, :] = np.arange(cols)
    for i in range(1, rows):
        for j in range(1, cols):
            cost[i, j] = min(cost[i - 1, j - 1] + (ref[i - 1] != hyp[j - 1]),
                             cost[i, j - 1] + 1, cost[i - 1, j] + 1)
    result = EditResult(distance=int(cost[-1, -1]), reference_length=len(ref))
    i, j = len(ref), len(hyp)
    while i or j:
        if i and j and cost[i, j] == \
                cost[i - 1, j - 1] + (ref[i - 1] != hyp[j - 1]):
            result.substitutions += int(ref[i - 1] != hyp[j - 1])
            i, j = i - 1, j - 1
        elif j and cost[i, j] == cost[i, j - 1] + 1:
            result.insertions += 1
            j -= 1
        else:
            result.deletions += 1
            i -= 1
    return result


def error_rate(pairs):
    """Pooled error rate of (reference, hypothesis) pairs."""
    distance = length = 0
    for ref, hyp in pairs:
        distance += edit_distance(ref, hyp).distance
        length += len(ref)
    if not length:
        raise EvaluationError.EmptyLanguage('No reference tokens')
    return distance / length


@dataclass
class UtteranceResult:
    """Decoded and reference sequences of an utterance."""

    id: str
    language_id: str
    reference: list
    hypothesis: list
    attribute_references: dict = None
    attribute_hypotheses: dict = None


def per_language_per(results):
    """Pooled PER of the utterances of one language."""
    if not results:
        raise EvaluationError.EmptyLanguage('No utterance')
    return error_rate((result.reference, result.hypothesis)
                      for result in results)


def macro_average(values):
    """Mean and population variance."""
    values = np.asarray(list(values), dtype=np.float64)
    if not values.size:
        raise EvaluationError.EmptyLanguage('No language')
    return float(values.mean()), float(values.var())


def attribute_error_rates(references, hypotheses):
    """Pooled error rate per attribute.

    :param references: attribute to list of label sequences.
    :param hypotheses: attribute to list of label sequences, same order.
    """
    if not hypotheses:
        raise EvaluationError.NoAttributeHeads('No attribute hypotheses')
    return {name: error_rate(zip(references[name], hypotheses[name]))
            for name in references}


def aer(references, hypotheses):
    """Mean of the attribute error rates."""
    rates = attribute_error_rates(references, hypotheses)
    return float(np.mean(list(rates.values())))


def correlation_r2(xs, ys):
    """Squared Pearson correlation."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.size < 2 or xs.size != ys.size:
        raise EvaluationError.DegenerateInput('Need two paired points')
    dx, dy = xs - xs.mean(), ys - ys.mean()
    sxx, syy = (dx * dx).sum(), (dy * dy).sum()
    if sxx == 0 or syy == 0:
        raise EvaluationError.DegenerateInput('Constant input')
    return float(min(1.0, (dx * dy).sum() ** 2 / (sxx * syy)))


def welch_t_test(xs, ys):
    """Welch's unequal variances t-test.

    :return: t statistic and two-sided p value.
    """
    if len(xs) < 2 or len(ys) < 2:
        raise EvaluationError.DegenerateInput('Need two values per group')
    result = st.ttest_ind(xs, ys, equal_var=False)
    return float(result.statistic), float(result.pvalue)


@dataclass
class LanguageResult:
    """Scores of one language."""

    language_id: str
    per: float
    utterances: int
    aer: float = None
    attribute_rates: dict = field(default_factory=dict)
    family: str = ''
    hours: float = None


@dataclass
class EvalReport:
    """Evaluation of a recognizer on a corpus."""

    languages: dict = field(default_factory=dict)
    macro_per: float = None
    pooled_per: float = None
    per_variance: float = None
    attribute_rates: dict = field(default_factory=dict)
    aer: float = None
    r2: float = None
    utterances: int = 0
    skipped: int = 0
    errors: int = 0

    def to_dict(self):
        """Plain structure for YAML or JSON output."""
        return {
            'macro_per': self.macro_per,
            'pooled_per': self.pooled_per,
            'per_variance': self.per_variance,
            'aer': self.aer,
            'r2': self.r2,
            'utterances': self.utterances,
            'skipped': self.skipped,
            'errors': self.errors,
            'attribute_rates': self.attribute_rates,
            'languages': {
                language_id: {'per': result.per, 'aer': result.aer,
                              'utterances': result.utterances}
                for language_id, result in self.languages.items()
            },
        }


def decode_utterance(model, utterance):
    """Decode an utterance with every head of a recognizer."""
    frames = utterance.frames
    result = UtteranceResult(
        id=utterance.id, language_id=utterance.language_id,
        reference=list(utterance.phonemes),
        hypothesis=model.decode(frames, utterance.language_id))
    hypotheses = model.decode_attributes(frames)
    if hypotheses is not None:
        segments = [model.database.segment(ipa)
                    for ipa in utterance.phonemes]
        result.attribute_hypotheses = hypotheses
        result.attribute_references = {
            name: [value.label for value in values] for name, values in
            attribute_targets(segments, model.schema).items()}
    return result


def summarize(results, skipped=0, languages_table=None, errors=0):
    """Report of decoded utterances.

    :param skipped: number of utterances too short to decode.
    :param errors: number of utterances failing on a lookup.

    :param languages_table: language to (family, hours) mapping.
    """
    languages_table = languages_table or {}
    report = EvalReport(utterances=len(results), skipped=skipped,
                        errors=errors)
    by_language = {}
    for result in results:
        by_language.setdefault(result.language_id, []).append(result)
    has_heads = bool(results) and \
        results[0].attribute_hypotheses is not None
    for language_id, language_results in by_language.items():
        family, hours = languages_table.get(language_id, ('', None))
        language = LanguageResult(
            language_id=language_id,
            per=per_language_per(language_results),
            utterances=len(language_results), family=family, hours=hours)
        if has_heads:
            references, hypotheses = _attribute_sequences(language_results)
            language.attribute_rates = attribute_error_rates(
                references, hypotheses)
            language.aer = float(np.mean(
                list(language.attribute_rates.values())))
        report.languages[language_id] = language
    if report.languages:
        report.macro_per, report.per_variance = macro_average(
            language.per for language in report.languages.values())
        report.pooled_per = error_rate(
            (result.reference, result.hypothesis) for result in results)
    if has_heads and results:
        references, hypotheses = _attribute_sequences(results)
        report.attribute_rates = attribute_error_rates(references,
                                                       hypotheses)
        report.aer = float(np.mean(list(report.attribute_rates.values())))
        try:
            report.r2 = correlation_r2(
                [language.per for language in report.languages.values()],
                [language.aer for language in report.languages.values()])
        except EvaluationError.DegenerateInput:
            report.r2 = None
    return report


def _attribute_sequences(results):
    references, hypotheses = {}, {}
    for result in results:
        for name, labels in result.attribute_references.items():
            references.setdefault(name, []).append(labels)
            hypotheses.setdefault(name, []).append(
                result.attribute_hypotheses[name])
    return references, hypotheses


def evaluate(model, utterances, db, inventories=None, languages_table=None,
             workers=1, shuffle_seed=None):
    """Decode and score utterances.

    Languages outside of the recognizer phone space are added with
    :func:`zero_shot_rebind` first. With a ``shuffle_seed`` the languages
    are bound with :func:`shuffled_control` instead, which scores the
    shuffled feature control of a zero-shot experiment.

    Too short utterances are skipped, utterances failing on a segment or
    language lookup are counted as errors; both are logged and the other
    utterances are still scored.

    :param inventories: Inventory list used instead of the database ones.
    :param workers: number of decoding threads.
    :param shuffle_seed: random seed of the shuffled feature control.
    :return: EvalReport
    """
    if shuffle_seed is not None:
        model = shuffled_control(model, inventories or sorted({
            utterance.language_id for utterance in utterances}), db,
            shuffle_seed)
    else:
        missing = inventories or sorted({
            utterance.language_id for utterance in utterances
            if utterance.language_id not in model.space.groups})
        if missing:
            model = zero_shot_rebind(model, missing, db)

    def decode(utterance):
        try:
            return decode_utterance(model, utterance)
        except ModelError.TooShort as error:
            LOGGER.warning('skip utterance %s: %s', utterance.id, error)
            return error
        except UTTERANCE_ERRORS as error:
            LOGGER.error('utterance %s: %s', utterance.id, error)
            return error

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            decoded = list(executor.map(decode, utterances))
    else:
        decoded = [decode(utterance) for utterance in utterances]
    results = [item for item in decoded if isinstance(item, UtteranceResult)]
    return summarize(
        results,
        skipped=sum(isinstance(item, ModelError.TooShort) for item in decoded),
        languages_table=languages_table,
        errors=sum(isinstance(item, UTTERANCE_ERRORS) for item in decoded))


def write_eval_csv(report, stream=None):
    """Per language CSV, the first line names the layout version.

    :return: the CSV text when no stream is given.
    """
    output = stream or io.StringIO()
    output.write(f'# rero-phonrec evaluation v{EVALUATION_CSV_VERSION}\n')
    writer = csv.writer(output, lineterminator='\n')
    writer.writerow(EVALUATION_CSV_COLUMNS)
    for language in report.languages.values():
        writer.writerow([
            language.language_id, language.family,
            '' if language.hours is None else f'{language.hours:.6f}',
            language.utterances, f'{language.per:.6f}',
            '' if language.aer is None else f'{language.aer:.6f}'])
    if stream is None:
        return output.getvalue()


def read_eval_csv(stream):
    """Rows of a per language CSV with numbers parsed."""
    lines = [line for line in stream if not line.startswith('#')]
    rows = []
    for row in csv.DictReader(lines):
        for key in ('hours', 'per', 'aer'):
            row[key] = float(row[key]) if row.get(key) else None
        row['utterances'] = int(row['utterances'])
        rows.append(row)
    return rows


def read_languages_table(stream):
    """Language to (family, hours) mapping of a TSV with a header."""
    table = {}
    for row in csv.DictReader(stream, delimiter='\t'):
        hours = row.get('hours')
        table[row['language']] = (row.get('family') or '',
                                  float(hours) if hours else None)
    return table


def report_by_family(rows, baseline_rows=None):
    """Mean PER per family and the mean PER change against a baseline.

    :return: list of (family, languages, per, delta) tuples, ``delta`` is
        ``None`` without baseline.
    """
    baseline = {row['language']: row['per'] for row in baseline_rows or []}
    families = {}
    for row in rows:
        families.setdefault(row['family'] or '', []).append(row)
    lines = []
    for family in sorted(families):
        members = families[family]
        per = float(np.mean([row['per'] for row in members]))
        deltas = [row['per'] - baseline[row['language']]
                  for row in members if row['language'] in baseline]
        lines.append((family, len(members), per,
                      float(np.mean(deltas)) if deltas else None))
    return lines


def report_by_hours(rows, baseline_rows=None):
    """Per language PER against hours of training data.

    :return: list of (language, hours, per, delta) tuples sorted by hours.
    """
    baseline = {row['language']: row['per'] for row in baseline_rows or []}
    lines = [
        (row['language'], row['hours'], row['per'],
         row['per'] - baseline[row['language']]
         if row['language'] in baseline else None)
        for row in rows
    ]
    return sorted(lines, key=lambda line: (
        line[1] is None, line[1] or 0.0, line[0]))
