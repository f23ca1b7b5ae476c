import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from voxid.errors import DimensionMismatch, EmptyDataset, EmptyUtterance, FeatureError, RaggedVectors
from voxid.features import (
    LabeledDataset,
    Standardizer,
    UtteranceFeatures,
    apply_standardizer,
    fit_standardizer,
    invert_standardizer,
    split_dataset,
    summarize,
)
from voxid.mfcc import AcousticVector

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def test_identical_vectors():
    v = np.array([1.0, -2.0, 3.5])
    f = summarize([AcousticVector(v)] * 5)
    np.testing.assert_array_equal(f.means, v)
    np.testing.assert_array_equal(f.stds, 0.0)


def test_population_std():
    f = summarize([np.array([1.0]), np.array([3.0])])
    assert f.means[0] == 2.0 and f.stds[0] == 1.0


def test_summary_errors():
    with pytest.raises(EmptyUtterance):
        summarize([])
    with pytest.raises(RaggedVectors):
        summarize([np.zeros(3), np.zeros(4)])


def test_summary_against_spreadsheet_recomputation(corpus):
    # mean / std written out the long way on one utterance's matrix
    from voxid.mfcc import mfcc_matrix
    from voxid.synthetic import corpus_clips

    _, _, clip = next(corpus_clips(1, 1, seed=3))
    m = mfcc_matrix(clip)
    f = summarize(m)
    n = len(m)
    for j in range(m.shape[1]):
        col = [float(x) for x in m[:, j]]
        mean = sum(col) / n
        std = (sum((x - mean) ** 2 for x in col) / n) ** 0.5
        assert f.means[j] == pytest.approx(mean, abs=1e-9)
        assert f.stds[j] == pytest.approx(std, abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(arrays(float, st.tuples(st.integers(1, 30), st.integers(1, 6)), elements=finite), st.randoms())
def test_summary_permutation_invariant(m, rnd):
    perm = list(range(len(m)))
    rnd.shuffle(perm)
    a, b = summarize(m), summarize(m[perm])
    assert len(a) == 2 * m.shape[1]
    np.testing.assert_allclose(a.values, b.values, rtol=1e-9, atol=1e-9)
    assert np.all(a.stds >= 0)


def test_fit_standardizer_simple():
    s = fit_standardizer(LabeledDataset([[0.0], [2.0]], [1, 2]))
    assert s.mean[0] == 1.0 and s.std[0] == 1.0
    s = fit_standardizer(LabeledDataset([[5.0, 1.0], [5.0, 3.0]], [1, 2]))
    assert s.std[0] == 1.0


def test_fit_standardizer_empty():
    with pytest.raises(EmptyDataset):
        fit_standardizer(LabeledDataset(np.zeros((0, 3)), []))


def test_corpus_standardized(corpus):
    s = fit_standardizer(corpus.train)
    z = apply_standardizer(corpus.train, s).features
    assert np.max(np.abs(z.mean(axis=0))) < 1e-9
    assert np.max(np.abs(z.std(axis=0) - 1)) < 1e-9


def test_apply_standardizer_cases():
    s = Standardizer([1.0, 2.0], [2.0, 4.0])
    assert np.all(apply_standardizer(UtteranceFeatures([1.0, 2.0]), s).values == 0)
    ident = Standardizer([0.0, 0.0], [1.0, 1.0])
    np.testing.assert_array_equal(apply_standardizer(np.array([3.0, -1.0]), ident), [3.0, -1.0])
    with pytest.raises(DimensionMismatch):
        apply_standardizer(np.zeros(3), s)


@given(arrays(float, 5, elements=finite), arrays(float, 5, elements=finite),
       arrays(float, 5, elements=st.floats(1e-3, 1e3)))
def test_standardizer_round_trip(x, mean, std):
    s = Standardizer(mean, std)
    back = invert_standardizer(apply_standardizer(UtteranceFeatures(x), s), s)
    np.testing.assert_allclose(back.values, x, rtol=1e-12, atol=1e-12 * (1 + np.max(np.abs(x)) + np.max(np.abs(mean))))


def test_dataset_validation():
    with pytest.raises(FeatureError):
        LabeledDataset([[1.0]], [0])
    with pytest.raises(DimensionMismatch):
        LabeledDataset([[1.0], [2.0]], [1])
    with pytest.raises(DimensionMismatch):
        LabeledDataset.from_rows([([1.0], 1), ([1.0, 2.0], 2)])
    with pytest.raises(EmptyDataset):
        LabeledDataset.from_rows([])
    ds = LabeledDataset.from_rows([(UtteranceFeatures([1.0, 2.0]), 2), ([3.0, 4.0], 1)])
    assert ds.feature_dim == 2 and ds.speakers == [1, 2]
    assert [lab for _, lab in ds.rows] == [2, 1]


def test_split_dataset_per_speaker():
    X = np.arange(40.0).reshape(20, 2)
    y = np.repeat([1, 2], 10)
    train, test = split_dataset(LabeledDataset(X, y), 0.5, seed=4)
    assert len(train) == 10 and len(test) == 10
    assert sorted(train.labels.tolist()) == [1] * 5 + [2] * 5
    rows = {tuple(r) for r in train.features} | {tuple(r) for r in test.features}
    assert len(rows) == 20
