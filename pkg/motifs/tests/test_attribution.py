import numpy as np
import pytest

from autodiff import tensor as ad
from autodiff.tensor import Tensor, no_grad
from chem.features import featurize
from chem.smiles import parse_smiles
from encoder.gnn import GraphBatch, readout_masked
from fragments.brics import Fragment, brics_decompose
from moldata.ingest import MISSING
from motifs.attribution import (
    AttributionScore,
    MotifAssignment,
    attribute,
    attribute_batch,
    margin_loss,
    motif_size,
    pseudo_labels,
    score_fragments,
    select_motifs,
)

from .conftest import MOLECULES, make_model


def graph(smiles):
    return featurize(parse_smiles(smiles))


def scores_of(values):
    return [AttributionScore(j, np.array([v]), float(v)) for j, v in enumerate(values)]


def single_atom_fragments(count):
    return [Fragment((j,)) for j in range(count)]


def test_logit_difference_is_signed_by_label():
    [positive] = score_fragments([0.2], [[1.0]], [1.0])
    [negative] = score_fragments([0.2], [[1.0]], [0.0])
    assert positive.aggregate == pytest.approx(0.8)
    assert negative.aggregate == pytest.approx(-0.8)


def test_missing_tasks_are_left_out_of_the_aggregate():
    [score] = score_fragments([0.0, 0.0], [[0.5, 9.0]], [1.0, MISSING])
    assert score.aggregate == pytest.approx(0.5)
    assert np.isnan(score.per_task[1])


def test_no_observed_label_gives_no_scores():
    assert score_fragments([0.0], [[1.0]], [MISSING]) is None


def test_whole_molecule_fragment_scores_exactly_zero():
    g = graph("CC(=O)Nc1ccccc1")
    encoder, head = make_model(seed=4, num_tasks=2)
    [score] = attribute(g, [Fragment(tuple(range(g.num_atoms)))], encoder, head, [1.0, 0.0])
    assert score.aggregate == 0.0
    assert np.all(score.per_task == 0.0)


def test_scores_match_a_masked_readout():
    g = graph("CC(=O)Nc1ccccc1")
    fragments = brics_decompose(g)
    encoder, head = make_model(seed=2)
    scores = attribute(g, fragments, encoder, head, [1.0])
    with no_grad():
        h_v, h = encoder.encode(g)
        full = head(h).data[0, 0]
        for fragment, score in zip(fragments, scores):
            masked = head(readout_masked(h_v, fragment.mask(g.num_atoms))).data[0, 0]
            assert score.aggregate == pytest.approx(masked - full, abs=1e-12)


def test_label_flip_negates_scores_over_random_pairs():
    rng = np.random.default_rng(0)
    for trial in range(200):
        g = graph(MOLECULES[trial % len(MOLECULES)])
        fragments = brics_decompose(g)
        encoder, head = make_model(seed=trial, num_tasks=2, dim=6, readout=("mean", "sum", "max")[trial % 3])
        labels = rng.integers(0, 2, size=2).astype(float)
        forward = attribute(g, fragments, encoder, head, labels)
        flipped = attribute(g, fragments, encoder, head, 1.0 - labels)
        for a, b in zip(forward, flipped):
            assert np.array_equal(a.per_task, -b.per_task)
        whole = attribute(g, [Fragment(tuple(range(g.num_atoms)))], encoder, head, labels)
        assert whole[0].aggregate == 0.0


def test_batch_attribution_skips_unlabeled_molecules():
    graphs = [graph("CC(=O)NC"), graph("CCOC")]
    batch = GraphBatch.from_graphs(graphs)
    encoder, head = make_model()
    with no_grad():
        h_v, h = encoder(batch)
    labels = np.array([[1.0], [MISSING]])
    results = attribute_batch(batch, [brics_decompose(g) for g in graphs], h_v, h, head, labels)
    assert len(results[0]) == 2
    assert results[1] is None


@pytest.mark.parametrize("count,psi,expected", [
    (10, 0.2, 2), (10, 0.3, 3), (10, 0.1, 1), (4, 0.25, 1), (3, 0.5, 2), (7, 1.0, 7), (1, 0.2, 1),
])
def test_motif_size(count, psi, expected):
    assert motif_size(count, psi) == expected


def test_select_motifs_excludes_positives_from_negatives():
    assignment = select_motifs(scores_of([3, 1, -2, -2]), single_atom_fragments(4), 0.25)
    assert assignment.positive_fragments == (0,)
    assert assignment.negative_fragments == (2,)
    assert assignment.category(1) == "unrelated"


def test_select_motifs_may_overlap_when_fragments_are_few():
    assignment = select_motifs(scores_of([1, 2, 3]), single_atom_fragments(3), 0.5)
    assert assignment.positive_fragments == (1, 2)
    assert assignment.negative_fragments == (0, 1)


def test_single_fragment_is_degenerate():
    assignment = select_motifs(scores_of([0.0]), [Fragment((0, 1, 2))], 0.2)
    assert assignment.degenerate
    assert assignment.positive_nodes == assignment.negative_nodes == (0, 1, 2)


def test_assignment_record_round_trip():
    assignment = select_motifs(scores_of([0.5, -1.0, 2.0]), [Fragment((0,)), Fragment((1, 2)), Fragment((3,))], 0.2)
    assert MotifAssignment.from_record(assignment.as_record()) == assignment
    assert assignment.positive_mask(4).tolist() == [0, 0, 0, 1]
    assert assignment.negative_mask(4).tolist() == [0, 1, 1, 0]


def test_pseudo_labels_threshold_at_zero():
    assert pseudo_labels([[-0.1, 0.0, 2.0]]).tolist() == [[0.0, 1.0, 1.0]]


def test_margin_loss_bounds():
    rng = np.random.default_rng(5)
    for margin in (0.1, 0.5, 1.0):
        for _ in range(50):
            h, h_pos, h_neg = (Tensor(rng.normal(scale=3.0, size=(6, 4))) for _ in range(3))
            value = margin_loss(h, h_pos, h_neg, margin).item()
            assert -(1 + margin) <= value <= 0.0


def test_equal_motifs_give_minus_margin():
    rng = np.random.default_rng(6)
    h = Tensor(rng.normal(size=(3, 4)))
    motif = Tensor(rng.normal(size=(3, 4)))
    assert margin_loss(h, motif, motif, 0.5).item() == -0.5


def test_margin_loss_gradient_reaches_the_embeddings():
    rng = np.random.default_rng(8)
    h = Tensor(rng.normal(size=(2, 3)), requires_grad=True)
    h_pos = Tensor(rng.normal(size=(2, 3)))
    h_neg = Tensor(np.zeros((2, 3)))
    with ad.Tape() as tape:
        tape.backward(margin_loss(h, h_pos, h_neg, 0.5))
    assert h.grad.shape == (2, 3)
    assert np.any(h.grad != 0)
