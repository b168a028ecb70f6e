import pytest
from hypothesis import given, strategies as st

from anatreport.metrics import (
    LABELS,
    NEGATIVE,
    POSITIVE,
    UNMENTIONED,
    DiseaseLabelSet,
    ce_scores,
    extract_labels,
    load_keyword_table,
)


def label_set(positives=(), negatives=()):
    statuses = {l: UNMENTIONED for l in LABELS}
    statuses.update({l: POSITIVE for l in positives})
    statuses.update({l: NEGATIVE for l in negatives})
    return DiseaseLabelSet(statuses=statuses)


class TestExtractLabels:
    def test_direct_table_hit(self):
        labels = extract_labels("There is cardiomegaly.")
        assert labels["Cardiomegaly"] == POSITIVE

    def test_negation_flips(self):
        labels = extract_labels("No pneumothorax.")
        assert labels["Pneumothorax"] == NEGATIVE

    def test_empty_text_all_unmentioned(self):
        labels = extract_labels("")
        assert all(labels[l] == UNMENTIONED for l in LABELS)

    def test_negation_scoped_to_sentence(self):
        labels = extract_labels("No pleural effusion. There is a pleural effusion on the left.")
        # A later un-negated mention wins over an earlier negated one.
        assert labels["Pleural Effusion"] == POSITIVE

    def test_cue_must_precede_phrase(self):
        labels = extract_labels("Pneumothorax is seen, with no change.")
        assert labels["Pneumothorax"] == POSITIVE

    def test_without_as_cue(self):
        labels = extract_labels("The lungs are clear without focal consolidation.")
        assert labels["Consolidation"] == NEGATIVE

    def test_no_finding_requires_normality_phrase(self):
        assert extract_labels("The lungs are clear.")["No Finding"] == POSITIVE
        assert extract_labels("Comparison to prior radiograph.")["No Finding"] == UNMENTIONED

    def test_no_finding_blocked_by_positive(self):
        labels = extract_labels("The lungs are clear. There is cardiomegaly.")
        assert labels["No Finding"] == UNMENTIONED
        assert labels["Cardiomegaly"] == POSITIVE

    def test_multiword_phrase(self):
        labels = extract_labels("There is an enlarged cardiomediastinal contour.")
        assert labels["Enlarged Cardiomediastinum"] == POSITIVE

    def test_deterministic_and_total(self):
        text = "No pneumonia. Possible edema, cannot exclude fracture!"
        assert extract_labels(text).to_dict() == extract_labels(text).to_dict()

    def test_synthetic_templates_hit_expected_labels(self):
        labels = extract_labels(
            "There is patchy opacity within the right lung concerning for pneumonia ."
        )
        assert labels["Lung Opacity"] == POSITIVE
        assert labels["Pneumonia"] == POSITIVE

    def test_keyword_table_versioned(self):
        table = load_keyword_table()
        assert isinstance(table["version"], int)
        assert len(table["labels"]) == 13  # everything except No Finding


class TestDiseaseLabelSet:
    def test_exactly_14_labels(self):
        assert len(LABELS) == 14
        assert len(label_set().to_dict()) == 14

    def test_no_finding_exclusivity_enforced(self):
        with pytest.raises(ValueError):
            label_set(positives=("No Finding", "Edema"))

    def test_unknown_label_rejected(self):
        with pytest.raises(ValueError):
            DiseaseLabelSet(statuses={"Gout": POSITIVE})


class TestCeScores:
    def test_perfect(self):
        sets = [label_set(positives=("Edema",)), label_set(negatives=("Pneumonia",))]
        out = ce_scores(sets, sets)
        assert out["micro"] == {"f1": 1.0, "precision": 1.0, "recall": 1.0}

    def test_counting_oracle_case(self):
        # 3 TP, 1 FP, 2 FN on a single label: P = 0.75, R = 0.6, F1 = 2/3.
        gold = [label_set(positives=("Edema",))] * 3 + [label_set()] + \
               [label_set(positives=("Edema",))] * 2
        pred = [label_set(positives=("Edema",))] * 4 + [label_set()] * 2
        out = ce_scores(pred, gold)
        assert out["micro"]["precision"] == pytest.approx(0.75)
        assert out["micro"]["recall"] == pytest.approx(0.6)
        assert out["micro"]["f1"] == pytest.approx(2 / 3)

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            ce_scores([], [])

    def test_misaligned_rejected(self):
        with pytest.raises(ValueError):
            ce_scores([label_set()], [])

    @given(st.lists(st.tuples(st.booleans(), st.booleans()), min_size=1, max_size=40))
    def test_micro_matches_bruteforce_confusion_matrix(self, rows):
        # One label varies; the oracle recounts the confusion matrix directly.
        pred = [label_set(positives=("Fracture",) if p else ()) for p, _ in rows]
        gold = [label_set(positives=("Fracture",) if g else ()) for _, g in rows]
        out = ce_scores(pred, gold)["micro"]
        tp = sum(1 for p, g in rows if p and g)
        fp = sum(1 for p, g in rows if p and not g)
        fn = sum(1 for p, g in rows if not p and g)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        assert out == {"f1": f1, "precision": precision, "recall": recall}

    def test_macro_averages_labels(self):
        pred = [label_set(positives=("Edema",)), label_set(positives=("Fracture",))]
        gold = [label_set(positives=("Edema",)), label_set()]
        out = ce_scores(pred, gold)
        assert out["per_label"]["Edema"]["f1"] == 1.0
        assert out["per_label"]["Fracture"]["f1"] == 0.0
        assert out["macro"]["f1"] == pytest.approx(1 / 14)
