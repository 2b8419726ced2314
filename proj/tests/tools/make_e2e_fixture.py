#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
# Regenerates tests/data/e2e: 20 posts, 55 comments (5 rejected), 50 samples,
# two scripted labelers, human labels for every flagged sample, tiny PNGs.
import json
import os
import random
import struct
import sys
import zlib

OUT = sys.argv[1] if len(sys.argv) > 1 else os.path.join(os.path.dirname(__file__), "..", "data", "e2e")
rng = random.Random(5)

SUBJECTS = ["the rally", "this plan", "the debate", "her record", "his record", "the economy",
            "our border", "the campaign", "working families", "the future"]
FAVOR = ["I fully support this and will vote for it in November",
         "This is exactly the leadership our country needs right now",
         "Proud to stand with this campaign all the way to the polls",
         "Great message, this gives me real hope for the future"]
AGAINST = ["This is a disaster and I will never vote for it",
           "Nothing but empty promises from a failed politician again",
           "Stop lying to the American people, we see right through it",
           "Worst idea I have heard all year, total failure"]
TOPICS = ["CALLS_FOR_VOTER_SUPPORT", "SHARING_POLITICAL_IDEOLOGIES", "SELF_PROMOTION",
          "REPORTING_ACHIEVEMENTS", "OTHER"]


def png(path, r, g, b):
    raw = b"".join(b"\x00" + bytes([r, g, b]) * 4 for _ in range(4))
    def chunk(t, d):
        c = struct.pack(">I", len(d)) + t + d
        return c + struct.pack(">I", zlib.crc32(t + d) & 0xFFFFFFFF)
    data = b"\x89PNG\r\n\x1a\n" + chunk(b"IHDR", struct.pack(">IIBBBBB", 4, 4, 8, 2, 0, 0, 0))
    data += chunk(b"IDAT", zlib.compress(raw, 9)) + chunk(b"IEND", b"")
    with open(path, "wb") as f:
        f.write(data)


def main():
    os.makedirs(os.path.join(OUT, "media"), exist_ok=True)
    posts, comments = [], []
    for i in range(20):
        author = "HARRIS" if i < 10 else "TRUMP"
        pid = f"p{i:02d}"
        media = [{"kind": "IMAGE", "uri": f"{pid}.png"}]
        png(os.path.join(OUT, "media", f"{pid}.png"), 10 * i, 255 - 10 * i, (37 * i) % 256)
        if i in (3, 14):
            media.append({"kind": "VIDEO", "uri": f"{pid}.mp4", "first_frame_uri": f"{pid}_frame.png"})
            png(os.path.join(OUT, "media", f"{pid}_frame.png"), 200, (50 * i) % 256, 90)
        text = (f"Thank you to everyone who came out today, we talked about {rng.choice(SUBJECTS)} "
                f"and what comes next for {rng.choice(SUBJECTS)} https://t.co/{pid} #Vote2024")
        posts.append({"id": pid, "author": author, "text": text, "media": media,
                      "created_at": f"2024-10-{1 + i:02d}T12:00:00Z"})
    posts.append({"id": "p99", "author": "HARRIS", "text": "Gracias a todos por venir hoy, nos vemos en la próxima para el futuro del país",
                  "media": [{"kind": "IMAGE", "uri": "p00.png"}], "created_at": "2024-10-02T12:00:00Z"})

    # 46 comments on single-image posts and 2 on the two-image posts -> 50 samples.
    targets = [f"p{i:02d}" for i in range(20) if i not in (3, 14)]
    for k in range(46):
        stance = "FAVOR" if rng.random() < 0.35 else "AGAINST"
        body = rng.choice(FAVOR if stance == "FAVOR" else AGAINST)
        comments.append({"id": f"c{k:03d}", "parent_post_id": targets[k % len(targets)],
                         "text": f"@user{k} {body} about {rng.choice(SUBJECTS)}!!", "stance": stance})
    for k, pid in ((46, "p03"), (47, "p14")):
        comments.append({"id": f"c{k:03d}", "parent_post_id": pid,
                         "text": f"{rng.choice(AGAINST)} and everyone knows it", "stance": "AGAINST"})
    comments += [
        {"id": "r1", "parent_post_id": "p00", "text": "so true"},
        {"id": "r2", "parent_post_id": "p01", "text": "Esto es una vergüenza para todos los ciudadanos de este país y del mundo"},
        {"id": "r3", "parent_post_id": "p02", "text": "https://t.co/abc @someone"},
        {"id": "r4", "parent_post_id": "p04", "text": " ".join(["words"] * 140)},
        {"id": "r5", "parent_post_id": "p99", "text": "I agree with every single word of this wonderful post today"},
    ]
    with open(os.path.join(OUT, "posts.jsonl"), "w") as f:
        for p in posts:
            f.write(json.dumps(p, ensure_ascii=False) + "\n")
    with open(os.path.join(OUT, "comments.jsonl"), "w") as f:
        for c in comments:
            f.write(json.dumps(c, ensure_ascii=False) + "\n")

    sample_ids = []
    for c in comments[:48]:
        n = 2 if c["parent_post_id"] in ("p03", "p14") else 1
        sample_ids += [f"{c['id']}#{j}" for j in range(n)]
    assert len(sample_ids) == 50
    gold = {}
    for c in comments[:48]:
        for j in range(2):
            gold[f"{c['id']}#{j}"] = c["stance"]

    a, b, humans = {}, {}, []
    flagged = 0
    for n, sid in enumerate(sample_ids):
        topic = TOPICS[n % len(TOPICS)]
        a[sid] = f"STANCE: {gold[sid]}\nTOPIC: {topic}"
        if n % 5 == 2:
            flip = "FAVOR" if gold[sid] == "AGAINST" else "AGAINST"
            b[sid] = f"STANCE: {flip}\nTOPIC: {topic}"
            flagged += 1
            ts = f"2024-11-0{1 + flagged % 9}T09:00:00Z"
            first = gold[sid]
            second = gold[sid] if flagged % 3 else ("FAVOR" if first == "AGAINST" else "AGAINST")
            humans.append({"annotator_id": "ann1", "sample_id": sid, "stance": first, "topic": topic, "timestamp": ts})
            humans.append({"annotator_id": "ann2", "sample_id": sid, "stance": second, "topic": topic, "timestamp": ts})
            if second != first:
                humans.append({"annotator_id": "ann3", "sample_id": sid, "stance": gold[sid], "topic": topic, "timestamp": ts})
        elif n == 7:
            b[sid] = "I cannot decide."
            a[sid] = f"STANCE: {gold[sid]}\nTOPIC: {topic}"
            humans.append({"annotator_id": "ann1", "sample_id": sid, "stance": gold[sid], "topic": topic, "timestamp": "2024-11-03T10:00:00Z"})
            humans.append({"annotator_id": "ann2", "sample_id": sid, "stance": gold[sid], "topic": topic, "timestamp": "2024-11-03T10:05:00Z"})
        else:
            b[sid] = a[sid]
    for name, table in (("labeler_gpt4.json", a), ("labeler_qwen.json", b)):
        with open(os.path.join(OUT, name), "w") as f:
            json.dump(table, f, indent=1, sort_keys=True)
    with open(os.path.join(OUT, "human_labels.jsonl"), "w") as f:
        for h in humans:
            f.write(json.dumps(h) + "\n")

    config = {
        "run_name": "e2e-fixture",
        "paths": {"posts": "posts.jsonl", "comments": "comments.jsonl", "media_root": "media",
                  "human_labels": "human_labels.jsonl", "output": "out"},
        "filters": {"min_words": 10, "max_words": 128, "lang_threshold": 0.9, "length_filter_posts": True},
        "seeds": {"split": 7, "sdmg": 11, "generation": 13},
        "annotation": {"gate": "unanimity", "labelers": [
            {"id": "gpt4", "type": "scripted", "path": "labeler_gpt4.json"},
            {"id": "qwen", "type": "scripted", "path": "labeler_qwen.json"}]},
        "split": {"ratio": 0.8},
        "finetune": {"overrides": {}},
        "sdmg": {"enabled": True, "d_v": 16, "d_t": 16, "d": 16, "grid": 2, "encoder_layers": 2, "mode": "concat"},
        "generation": {"backend": "toy-prefix", "model": "LLaVA-SDMG", "modality": "Multi-modal", "max_in_flight": 4},
        "eval": {"by_target": True, "backends": {
            "classifier": {"type": "keyword"},
            "scorer": {"type": "uniform", "vocab": 32000},
            "embedder": {"type": "hashing", "dim": 256, "seed": 0},
            "joint_embedder": {"type": "hashing", "dim": 64, "seed": 0, "context_limit": 77},
            "threads": 2}},
    }
    with open(os.path.join(OUT, "config.json"), "w") as f:
        json.dump(config, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
