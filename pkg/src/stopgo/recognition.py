"""Instruction-to-task recognition: bag-of-words multinomial naive Bayes.

The trained model maps one corrected instruction sentence to a task label with
a normalized posterior over all classes. The class set is data-driven: it is
exactly the set of labels present in the training corpus.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .taskmodel import TaskLabel

__all__ = [
    "RecognitionError",
    "Prediction",
    "TaskSentenceClassifier",
    "tokenize",
    "train",
    "predict",
    "cross_validate",
    "extract_object_name",
    "load_corpus",
    "seed_corpus_path",
]

_TOKEN = re.compile(r"[0-9a-z]+")


class RecognitionError(ValueError):
    pass


def tokenize(text: str) -> list[str]:
    """Lowercase and split on any non-alphanumeric character, dropping empties."""
    return _TOKEN.findall(text.lower())


@dataclass(frozen=True)
class Prediction:
    label: TaskLabel
    scores: dict[TaskLabel, float]


class TaskSentenceClassifier:
    """Multinomial naive Bayes over sentence tokens.

    fit/predict shaped so a learned backend can be dropped in behind the same
    surface. Unknown tokens at predict time are skipped, not smoothed, so
    out-of-vocabulary noise cannot flip a confident prediction. Deterministic:
    classes follow the TaskLabel declaration order, the vocabulary is sorted.
    """

    def __init__(self, alpha: float = 1.0):
        if alpha <= 0:
            raise RecognitionError("alpha must be positive")
        self.alpha = alpha
        self.classes_: tuple[TaskLabel, ...] | None = None
        self.vocabulary_: dict[str, int] | None = None
        self.token_counts_: np.ndarray | None = None  # (n_classes, n_tokens) int64
        self.sentence_counts_: np.ndarray | None = None  # (n_classes,) int64

    def get_params(self) -> dict[str, float]:
        return {"alpha": self.alpha}

    @property
    def fitted(self) -> bool:
        return self.classes_ is not None

    def fit(self, sentences: list[str], labels: list[TaskLabel]) -> "TaskSentenceClassifier":
        if not sentences:
            raise RecognitionError("empty corpus")
        if len(sentences) != len(labels):
            raise RecognitionError("sentences and labels differ in length")
        present = {label for label in labels}
        classes = tuple(label for label in TaskLabel if label in present)
        class_index = {label: i for i, label in enumerate(classes)}
        vocab = sorted({tok for s in sentences for tok in tokenize(s)})
        vocab_index = {tok: i for i, tok in enumerate(vocab)}
        counts = np.zeros((len(classes), len(vocab)), dtype=np.int64)
        sentence_counts = np.zeros(len(classes), dtype=np.int64)
        for sentence, label in zip(sentences, labels):
            if not sentence.strip():
                raise RecognitionError("corpus sentences must be non-empty")
            c = class_index[label]
            sentence_counts[c] += 1
            for tok in tokenize(sentence):
                counts[c, vocab_index[tok]] += 1
        self.classes_ = classes
        self.vocabulary_ = vocab_index
        self.token_counts_ = counts
        self.sentence_counts_ = sentence_counts
        return self

    def _require_fitted(self):
        if not self.fitted:
            raise RecognitionError("classifier is not fitted")

    def predict(self, text: str) -> Prediction:
        """Posterior over classes for one sentence; argmax with ties broken by class order."""
        self._require_fitted()
        tokens = [t for t in tokenize(text) if t in self.vocabulary_]
        if not tokenize(text):
            raise RecognitionError("no content")
        counts = self.token_counts_
        totals = counts.sum(axis=1)
        vsize = counts.shape[1]
        log_post = np.log(self.sentence_counts_ / self.sentence_counts_.sum())
        for tok in tokens:
            j = self.vocabulary_[tok]
            log_post = log_post + np.log(
                (counts[:, j] + self.alpha) / (totals + self.alpha * vsize)
            )
        shifted = np.exp(log_post - log_post.max())
        probs = shifted / shifted.sum()
        best = int(np.argmax(probs))  # argmax takes the first maximum: class-order tie-break
        scores = {label: float(p) for label, p in zip(self.classes_, probs)}
        return Prediction(label=self.classes_[best], scores=scores)

    # --- persistence ---------------------------------------------------------

    def dump(self) -> str:
        """Versioned text dump: classes with counts, then sorted vocabulary rows."""
        self._require_fitted()
        lines = ["nbmodel v1", f"alpha {self.alpha!r}", f"classes {len(self.classes_)}"]
        for i, label in enumerate(self.classes_):
            lines.append(f"class {label.code} {self.sentence_counts_[i]}")
        tokens = sorted(self.vocabulary_, key=lambda t: self.vocabulary_[t])
        lines.append(f"vocab {len(tokens)}")
        for tok in tokens:
            j = self.vocabulary_[tok]
            row = " ".join(str(int(c)) for c in self.token_counts_[:, j])
            lines.append(f"token {tok} {row}")
        return "\n".join(lines) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dump(), encoding="utf-8")

    @classmethod
    def loads(cls, text: str) -> "TaskSentenceClassifier":
        lines = text.splitlines()
        if not lines or lines[0] != "nbmodel v1":
            raise RecognitionError("not a classifier model file")
        try:
            alpha = float(lines[1].split(" ", 1)[1])
            n_classes = int(lines[2].split(" ", 1)[1])
            classes = []
            sentence_counts = []
            for line in lines[3 : 3 + n_classes]:
                _, code, count = line.split(" ")
                classes.append(TaskLabel.from_code(code))
                sentence_counts.append(int(count))
            pos = 3 + n_classes
            n_vocab = int(lines[pos].split(" ", 1)[1])
            vocab_index = {}
            counts = np.zeros((n_classes, n_vocab), dtype=np.int64)
            for j, line in enumerate(lines[pos + 1 : pos + 1 + n_vocab]):
                parts = line.split(" ")
                if parts[0] != "token" or len(parts) != 2 + n_classes:
                    raise RecognitionError(f"bad token row: {line!r}")
                vocab_index[parts[1]] = j
                counts[:, j] = [int(c) for c in parts[2:]]
        except (IndexError, ValueError) as exc:
            raise RecognitionError(f"malformed model file: {exc}") from None
        clf = cls(alpha=alpha)
        clf.classes_ = tuple(classes)
        clf.vocabulary_ = vocab_index
        clf.token_counts_ = counts
        clf.sentence_counts_ = np.array(sentence_counts, dtype=np.int64)
        return clf

    @classmethod
    def load(cls, path: str | Path) -> "TaskSentenceClassifier":
        return cls.loads(Path(path).read_text(encoding="utf-8"))


def train(corpus: list[tuple[str, TaskLabel]], alpha: float = 1.0) -> TaskSentenceClassifier:
    sentences = [s for s, _ in corpus]
    labels = [l for _, l in corpus]
    return TaskSentenceClassifier(alpha=alpha).fit(sentences, labels)


def predict(model: TaskSentenceClassifier, text: str) -> Prediction:
    return model.predict(text)


def cross_validate(
    corpus: list[tuple[str, TaskLabel]],
    folds: int = 10,
    seed: int = 0,
    alpha: float = 1.0,
) -> tuple[float, dict[TaskLabel, dict[TaskLabel, int]]]:
    """Stratified k-fold cross-validation.

    Returns (mean fold accuracy, confusion matrix as true -> predicted -> count).
    Deterministic for a given seed. Every class needs at least `folds` sentences.
    """
    if folds < 2:
        raise RecognitionError("need at least 2 folds")
    by_class: dict[TaskLabel, list[int]] = {}
    for i, (_, label) in enumerate(corpus):
        by_class.setdefault(label, []).append(i)
    for label, members in by_class.items():
        if len(members) < folds:
            raise RecognitionError(
                f"class {label.code} has {len(members)} sentences, fewer than {folds} folds"
            )
    # Fold assignment is stratified and text-driven: each class's members are
    # ordered by sentence text and permuted with the same seeded generator, so
    # identical sentences land in identical folds even across classes.
    fold_of = np.zeros(len(corpus), dtype=np.int64)
    for label in sorted(by_class, key=lambda l: l.code):
        members = sorted(by_class[label], key=lambda i: (corpus[i][0], i))
        order = np.random.default_rng(seed).permutation(len(members))
        for pos, idx in zip(order, members):
            fold_of[idx] = int(pos) % folds

    classes = tuple(label for label in TaskLabel if label in by_class)
    confusion = {t: {p: 0 for p in classes} for t in classes}
    accuracies = []
    for fold in range(folds):
        train_set = [corpus[i] for i in range(len(corpus)) if fold_of[i] != fold]
        test_set = [corpus[i] for i in range(len(corpus)) if fold_of[i] == fold]
        model = train(train_set, alpha=alpha)
        correct = 0
        for sentence, truth in test_set:
            guess = model.predict(sentence).label
            confusion[truth][guess] += 1
            if guess is truth:
                correct += 1
        accuracies.append(correct / len(test_set))
    return float(np.mean(accuracies)), confusion


def save_confusion_csv(
    path: str | Path, confusion: dict[TaskLabel, dict[TaskLabel, int]]
) -> None:
    classes = list(confusion)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["true\\predicted", *[c.code for c in classes]])
        for t in classes:
            writer.writerow([t.code, *[confusion[t][p] for p in classes]])


def extract_object_name(text: str, vocabulary: list[str]) -> str | None:
    """Longest vocabulary entry whose token sequence occurs in the text.

    Length ties go to the leftmost occurrence, then to vocabulary order.
    Returns None when nothing matches.
    """
    tokens = tokenize(text)
    best: tuple[int, int, int] | None = None  # (-length, position, vocab order)
    best_name = None
    for order, name in enumerate(vocabulary):
        target = tokenize(name)
        if not target:
            continue
        for pos in range(len(tokens) - len(target) + 1):
            if tokens[pos : pos + len(target)] == target:
                key = (-len(target), pos, order)
                if best is None or key < best:
                    best = key
                    best_name = name
                break
    return best_name


def load_corpus(path: str | Path) -> list[tuple[str, TaskLabel]]:
    """Read a `label,sentence` CSV (header required) into a corpus list."""
    corpus = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header[:2]] != ["label", "sentence"]:
            raise RecognitionError(f"corpus file {path} must start with a label,sentence header")
        for row in reader:
            if not row:
                continue
            if len(row) < 2:
                raise RecognitionError(f"corpus row {row!r} needs label and sentence")
            corpus.append((row[1], TaskLabel.from_code(row[0])))
    if not corpus:
        raise RecognitionError(f"corpus file {path} has no rows")
    return corpus


def seed_corpus_path() -> Path:
    """Location of the bundled seed corpus shipped with the package."""
    return Path(__file__).parent / "data" / "seed_corpus.csv"


def load_seed_corpus() -> list[tuple[str, TaskLabel]]:
    return load_corpus(seed_corpus_path())
