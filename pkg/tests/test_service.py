import pytest
from fastapi.testclient import TestClient

from gpcorpus.evaluation import (
    Mark,
    load_marks,
    sample_for_curation,
    save_assignment,
    score_curation,
    collapse_last_write,
)
from gpcorpus.pipeline import load_corpus_labels
from gpcorpus.service import create_app, load_corpus_tasks


@pytest.fixture()
def curation_env(data_dir, tmp_path):
    corpus = data_dir / "golden_corpus.tsv"
    labels = load_corpus_labels(corpus)
    assignment = sample_for_curation(labels.keys(), n_total=5, n_curators=2,
                                     per_curator=3, overlap=1, seed=11)
    assignment_path = tmp_path / "assignment.json"
    save_assignment(assignment, assignment_path)
    marks_path = tmp_path / "marks.tsv"
    app = create_app(corpus, assignment_path, marks_path)
    return TestClient(app), assignment, marks_path, labels


class TestAssignmentEndpoint:
    def test_unknown_curator_404(self, curation_env):
        client, *_ = curation_env
        assert client.get("/api/assignment/nobody").status_code == 404

    def test_tasks_carry_spans_and_label(self, curation_env):
        client, assignment, _, labels = curation_env
        body = client.get("/api/assignment/curator1").json()
        assert body["curator"] == "curator1"
        assert [t["uid"] for t in body["tasks"]] == assignment.assignments["curator1"]
        for task in body["tasks"]:
            assert task["label"] == labels[task["uid"]].value
            sentence = task["sentence"]
            assert sentence[task["gene_start"]:task["gene_end"]] == task["gene_surface"]
            assert sentence[task["phenotype_start"]:task["phenotype_end"]] \
                == task["phenotype_surface"]
            assert task["mark"] is None

    def test_marked_tasks_show_current_mark(self, curation_env):
        client, assignment, *_ = curation_env
        uid = assignment.assignments["curator1"][0]
        client.post("/api/marks", json={"curator": "curator1", "uid": uid, "mark": "C"})
        tasks = client.get("/api/assignment/curator1").json()["tasks"]
        marked = [t for t in tasks if t["mark"] is not None]
        pending = [t for t in tasks if t["mark"] is None]
        assert len(marked) == 1 and marked[0]["uid"] == uid
        assert len(pending) == len(tasks) - 1


class TestMarkSubmission:
    def test_invalid_mark_422(self, curation_env):
        client, assignment, *_ = curation_env
        uid = assignment.assignments["curator1"][0]
        resp = client.post("/api/marks", json={"curator": "curator1", "uid": uid, "mark": "X"})
        assert resp.status_code == 422

    def test_unassigned_uid_403(self, curation_env):
        client, assignment, *_ = curation_env
        foreign = [u for u in assignment.assignments["curator2"]
                   if u not in assignment.assignments["curator1"]][0]
        resp = client.post("/api/marks",
                           json={"curator": "curator1", "uid": foreign, "mark": "C"})
        assert resp.status_code == 403

    def test_unknown_curator_404(self, curation_env):
        client, assignment, *_ = curation_env
        uid = assignment.assignments["curator1"][0]
        resp = client.post("/api/marks", json={"curator": "x", "uid": uid, "mark": "C"})
        assert resp.status_code == 404

    def test_progress_round_trip(self, curation_env):
        client, assignment, *_ = curation_env
        before = client.get("/api/progress").json()["progress"]
        assert before["curator1"] == {"marked": 0, "total": 3}
        uid = assignment.assignments["curator1"][1]
        client.post("/api/marks", json={"curator": "curator1", "uid": uid, "mark": "U",
                                        "note": "ambiguous NER span"})
        after = client.get("/api/progress").json()["progress"]
        assert after["curator1"]["marked"] == before["curator1"]["marked"] + 1
        assert after["curator2"]["marked"] == 0

    def test_repeat_same_mark_is_idempotent(self, curation_env):
        client, assignment, marks_path, _ = curation_env
        uid = assignment.assignments["curator1"][0]
        payload = {"curator": "curator1", "uid": uid, "mark": "I"}
        first = client.post("/api/marks", json=payload).json()
        second = client.post("/api/marks", json=payload).json()
        assert first["changed"] is True
        assert second["changed"] is False
        assert len(load_marks(marks_path)) == 1

    def test_changed_mark_last_write_wins(self, curation_env):
        client, assignment, marks_path, labels = curation_env
        uid = assignment.assignments["curator1"][0]
        client.post("/api/marks", json={"curator": "curator1", "uid": uid, "mark": "C"})
        client.post("/api/marks", json={"curator": "curator1", "uid": uid, "mark": "I"})
        records = load_marks(marks_path)
        assert [m.mark for m in records] == [Mark.CORRECT, Mark.INCORRECT]
        effective = collapse_last_write(records)
        assert len(effective) == 1 and effective[0].mark is Mark.INCORRECT
        # the scorer accepts the stream at any time
        counts, _ = score_curation(effective, labels)
        assert counts.scored() == 1

    def test_overlap_progress_is_per_curator(self, curation_env):
        client, assignment, *_ = curation_env
        shared = assignment.overlap_set[0]
        client.post("/api/marks", json={"curator": "curator1", "uid": shared, "mark": "C"})
        progress = client.get("/api/progress").json()["progress"]
        assert progress["curator1"]["marked"] == 1
        assert progress["curator2"]["marked"] == 0


class TestCorpusTasks:
    def test_loads_every_relation(self, data_dir):
        tasks = load_corpus_tasks(data_dir / "golden_corpus.tsv")
        assert len(tasks) == 10
        task = tasks["617bbf599900e832"]
        assert task["gene_surface"] == "SERPINB6"
        assert task["phenotype_surface"] == "hearing loss"
        assert task["label"] == "Known"

    def test_assignment_must_reference_corpus(self, data_dir, tmp_path):
        from gpcorpus.errors import IntegrityError
        from gpcorpus.evaluation import CurationAssignment

        bad = CurationAssignment({"ana": ["not-a-uid"]}, [], seed=0)
        path = tmp_path / "bad.json"
        save_assignment(bad, path)
        with pytest.raises(IntegrityError):
            create_app(data_dir / "golden_corpus.tsv", path, tmp_path / "m.tsv")
