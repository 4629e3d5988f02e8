"""HTTP service backing the curation workflow.

Single binary, no database: the corpus and assignment are read once at
startup, marks go to an append-only file. Writes are serialized through a
lock; reads serve in-memory snapshots. Endpoint payload field names are
documented in the README API reference and are stable.
"""

from __future__ import annotations

import datetime
import threading
from pathlib import Path
from typing import Literal

from fastapi import FastAPI, HTTPException
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .errors import IntegrityError
from .evaluation import (
    CurationMark,
    Mark,
    append_mark,
    collapse_last_write,
    load_assignment,
    load_marks,
)
from .pipeline import CORPUS_COLUMNS
from .tsvio import iter_rows, unescape_field


class MarkSubmission(BaseModel):
    curator: str
    uid: str
    mark: Literal["C", "I", "U"]
    note: str = ""


def load_corpus_tasks(path) -> dict[str, dict]:
    """uid -> task payload (sentence, label, entity spans) from a corpus TSV."""
    tasks: dict[str, dict] = {}
    for _, cols in iter_rows(path):
        if cols == CORPUS_COLUMNS or len(cols) != len(CORPUS_COLUMNS):
            continue
        tasks[cols[12]] = {
            "uid": cols[12],
            "doc_id": unescape_field(cols[0]),
            "sentence": unescape_field(cols[2]),
            "label": cols[11],
            "gene_surface": unescape_field(cols[3]),
            "gene_start": int(cols[5]),
            "gene_end": int(cols[6]),
            "phenotype_surface": unescape_field(cols[7]),
            "phenotype_start": int(cols[9]),
            "phenotype_end": int(cols[10]),
        }
    return tasks


class CurationState:
    """Mutable service state: effective marks plus the append-only log."""

    def __init__(self, corpus_path, assignment_path, marks_path):
        self.tasks = load_corpus_tasks(corpus_path)
        self.assignment = load_assignment(assignment_path)
        missing = self.assignment.all_uids() - self.tasks.keys()
        if missing:
            raise IntegrityError(f"assignment references uids not in corpus: {sorted(missing)[:5]}")
        self.marks_path = Path(marks_path)
        self._lock = threading.Lock()
        self._effective: dict[tuple[str, str], CurationMark] = {}
        if self.marks_path.exists():
            for m in collapse_last_write(load_marks(self.marks_path)):
                self._effective[(m.curator, m.relation_uid)] = m

    def current_mark(self, curator: str, uid: str) -> CurationMark | None:
        return self._effective.get((curator, uid))

    def submit(self, curator: str, uid: str, mark: Mark, note: str) -> bool:
        """Persist a judgment; returns False when it repeats the stored one."""
        with self._lock:
            current = self._effective.get((curator, uid))
            if current is not None and current.mark is mark and current.note == note:
                return False
            record = CurationMark(
                curator=curator,
                relation_uid=uid,
                mark=mark,
                timestamp=datetime.datetime.now(datetime.timezone.utc)
                .isoformat(timespec="seconds"),
                note=note,
            )
            append_mark(self.marks_path, record)
            self._effective[(curator, uid)] = record
            return True

    def progress(self) -> dict[str, dict[str, int]]:
        return {
            curator: {
                "marked": sum(1 for uid in uids if (curator, uid) in self._effective),
                "total": len(uids),
            }
            for curator, uids in sorted(self.assignment.assignments.items())
        }


def create_app(corpus_path, assignment_path, marks_path,
               static_dir: str | Path | None = None) -> FastAPI:
    state = CurationState(corpus_path, assignment_path, marks_path)
    app = FastAPI(title="gpcorpus curation service")
    app.state.curation = state

    @app.get("/api/assignment/{curator}")
    def get_assignment(curator: str):
        uids = state.assignment.assignments.get(curator)
        if uids is None:
            raise HTTPException(status_code=404, detail=f"unknown curator {curator!r}")
        tasks = []
        for uid in uids:
            task = dict(state.tasks[uid])
            current = state.current_mark(curator, uid)
            task["mark"] = current.mark.value if current else None
            task["note"] = current.note if current else ""
            tasks.append(task)
        return {"curator": curator, "tasks": tasks}

    @app.post("/api/marks")
    def post_mark(submission: MarkSubmission):
        uids = state.assignment.assignments.get(submission.curator)
        if uids is None:
            raise HTTPException(status_code=404, detail=f"unknown curator {submission.curator!r}")
        if submission.uid not in uids:
            raise HTTPException(
                status_code=403,
                detail=f"uid {submission.uid!r} is not assigned to {submission.curator!r}",
            )
        changed = state.submit(submission.curator, submission.uid,
                               Mark(submission.mark), submission.note)
        return {"curator": submission.curator, "uid": submission.uid,
                "mark": submission.mark, "stored": True, "changed": changed}

    @app.get("/api/progress")
    def get_progress():
        return {"progress": state.progress()}

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")
    return app


def serve_curation(corpus_path, assignment_path, marks_path,
                   port: int = 8642, host: str = "127.0.0.1",
                   static_dir: str | Path | None = None) -> None:
    import uvicorn

    app = create_app(corpus_path, assignment_path, marks_path, static_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")
