"""Record the SSE fixture used by the UI tests.

Drives a real served instance and captures the raw stream envelopes for
one model-policy turn whose action sequence is [4, 5], which traces as
three mini-turns (two actions plus the stop step). Regenerate with:

    cd "$(mktemp -d)"
    etadm generate --seed 13 --count 200 --out corpus.jsonl
    etadm collect --corpus corpus.jsonl --out records.jsonl
    etadm train --records records.jsonl --out model.npz
    etadm serve --model model.npz --port 8731 &
    python3 <this file> http://127.0.0.1:8731 <repo>/frontend/test/fixtures
"""

import json
import pathlib
import sys

import httpx


def main() -> None:
    base, out_dir = sys.argv[1], pathlib.Path(sys.argv[2])
    with httpx.Client(base_url=base, timeout=10.0) as client:
        created = client.post("/api/sessions", json={"policy": "model"}).json()
        sid = created["session_id"]
        envelopes = []
        with client.stream("GET", f"/api/sessions/{sid}/stream") as resp:
            lines = resp.iter_lines()
            turn = client.post(
                f"/api/sessions/{sid}/turns",
                json={"utterance": "a cheap chinese place in the north please"},
            ).json()
            for line in lines:
                if not line.startswith("data:"):
                    continue
                env = json.loads(line[len("data:") :].strip())
                envelopes.append(env)
                if env["type"] == "turn_done":
                    break
    assert turn["result"]["sequence"] == [4, 5], turn["result"]["sequence"]
    mini = [e for e in envelopes if e["type"] == "mini_turn"]
    assert len(mini) == 3, len(mini)
    assert all(e["payload"]["probabilities"] is not None for e in mini)
    fixture = {
        "action_names": created["action_names"],
        "envelopes": envelopes,
        "turn": turn,
    }
    out = out_dir / "stream_turn.json"
    out.write_text(json.dumps(fixture, indent=2) + "\n")
    print(f"wrote {out}: {len(envelopes)} envelopes")


if __name__ == "__main__":
    main()
