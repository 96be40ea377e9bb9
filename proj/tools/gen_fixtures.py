#!/usr/bin/env python3
"""Regenerates the frozen fixtures under data/. Output is deterministic."""

import json
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent
DATA = ROOT / "data"


def write_jsonl(path, records):
    path.write_text("".join(json.dumps(r) + "\n" for r in records))


def toy_tasks():
    tasks = [
        ("toy-sum", "Read two integers a and b on one line and print a + b.",
         "a, b = map(int, input().split())\nprint(a + b)\n",
         [("1 2", "3"), ("10 -4", "6"), ("0 0", "0")], 1),
        ("toy-max", "Read a line of space-separated integers and print the largest.",
         "xs = list(map(int, input().split()))\nprint(max(xs))\n",
         [("3 9 2", "9"), ("-5 -1 -7", "-1"), ("4", "4")], 2),
        ("toy-reverse", "Read a string and print it reversed.",
         "s = input()\nprint(s[::-1])\n",
         [("abc", "cba"), ("racecar", "racecar"), ("ab", "ba")], 3),
        ("toy-factorial", "Read n (0 <= n <= 20) and print n factorial.",
         "n = int(input())\nr = 1\nfor i in range(2, n + 1):\n    r *= i\nprint(r)\n",
         [("5", "120"), ("0", "1"), ("10", "3628800")], 4),
        ("toy-vowels", "Read a lowercase word and print how many vowels it contains.",
         "s = input()\nprint(sum(1 for c in s if c in 'aeiou'))\n",
         [("banana", "3"), ("rhythm", "0"), ("queue", "4")], 1),
    ]
    out = []
    for tid, statement, ref, examples, level in tasks:
        out.append({
            "id": tid,
            "statement": statement,
            "visible": [{"input": examples[0][0], "output": examples[0][1]}],
            "hidden": [{"input": i, "output": o} for i, o in examples[1:]],
            "tags": ["toy"],
            "reference_solution": ref,
            "mock_solve_level": level,
            "mock_debug_fix_at": 2,
            "mock_verify_accept_at": 2,
        })
    return out


def humaneval_sample():
    return [
        {"task_id": "HumanEval/toy-0", "entry_point": "add",
         "prompt": "def add(a, b):\n    \"\"\"Return the sum of a and b.\n    >>> add(2, 3)\n    5\n    \"\"\"\n",
         "tests": [{"input": "(2, 3)", "output": "5"}, {"input": "(-1, 1)", "output": "0"},
                   {"input": "(10, 5)", "output": "15"}],
         "canonical_solution": "def add(a, b):\n    return a + b\n"},
        {"task_id": "HumanEval/toy-1", "entry_point": "is_palindrome",
         "prompt": "def is_palindrome(s):\n    \"\"\"Return True when s reads the same backwards.\"\"\"\n",
         "tests": [{"input": "('abba',)", "output": "True"}, {"input": "('abc',)", "output": "False"},
                   {"input": "('',)", "output": "True"}],
         "canonical_solution": "def is_palindrome(s):\n    return s == s[::-1]\n"},
        {"task_id": "HumanEval/toy-2", "entry_point": "count_upper",
         "prompt": "def count_upper(s):\n    \"\"\"Count the uppercase letters in s.\"\"\"\n",
         "tests": [{"input": "('aBC',)", "output": "2"}, {"input": "('abc',)", "output": "0"},
                   {"input": "('XYZ',)", "output": "3"}],
         "canonical_solution": "def count_upper(s):\n    return sum(1 for c in s if c.isupper())\n"},
    ]


PROFILE = "competitive programming code generation benchmark python"
SNIPPET = "code generation benchmark python competitive programming"


def doc(rank, title, content, date="2024-05-20", snippet=SNIPPET):
    slug = title.lower().replace(" ", "-")[:40]
    return {"url": f"https://example.org/{rank:02d}-{slug}", "title": title, "snippet": snippet,
            "content": content, "published_date": date}


def selection_corpus():
    docs = []
    # Ranks 1-12: relevant posts split evenly between alpha-coder and beta-coder,
    # plus two stale delta-coder posts that the recency window must drop.
    for i in range(12):
        rank = i + 1
        if rank in (3, 8):
            docs.append(doc(rank, "delta-coder competitive programming results",
                            " ".join(["delta-coder leads every chart."] * 10), date="2024-03-01"))
            continue
        model = "alpha-coder" if len([d for d in docs if "alpha" in d["title"]]) <= \
            len([d for d in docs if "beta" in d["title"]]) else "beta-coder"
        docs.append(doc(rank, f"{model} competitive programming results",
                        f"{model} solved most of the weekly contest problems."))
    # Ranks 13-22: the decisive leaderboard post sits at corpus rank 17
    # (returned rank 15 once the stale posts are dropped).
    for rank in range(13, 23):
        if rank == 17:
            table = "\n".join(f"{k}. gamma-coder pass@1 run {k}" for k in range(1, 41))
            docs.append(doc(rank, "gamma-coder tops the competitive programming leaderboard",
                            "Leaderboard for code generation benchmarks.\n" + table))
        elif rank % 3 == 0:
            docs.append(doc(rank, "weekend sourdough baking notes", "Flour, water, salt and patience.",
                            snippet="bread recipe hydration starter"))
        else:
            model = "alpha-coder" if rank % 2 else "beta-coder"
            docs.append(doc(rank, f"{model} competitive programming notes",
                            f"{model} is a solid choice for contest practice."))
    # Ranks 23-32: more relevant coverage, reachable only with deep crawls.
    for rank in range(23, 33):
        model = ["gamma-coder", "alpha-coder", "beta-coder"][rank % 3]
        docs.append(doc(rank, f"{model} competitive programming review",
                        f"A review of {model} on programming benchmarks."))
    # Ranks 33-40: stale or off-topic.
    for rank in range(33, 41):
        if rank % 2:
            docs.append(doc(rank, "delta-coder competitive programming archive",
                            "delta-coder archive post.", date="2023-11-02"))
        else:
            docs.append(doc(rank, "garden irrigation planning", "Drip lines and timers.",
                            snippet="garden water schedule"))
    return {"reference_date": "2024-06-01", "documents": docs}


def registry():
    return {
        "default": "alpha-coder",
        "models": [
            {"model_id": "alpha-coder", "endpoint": "mock://scenario", "auth_env_var": "",
             "aliases": ["alpha-coder-latest"]},
            {"model_id": "beta-coder", "endpoint": "mock://scenario", "auth_env_var": "",
             "aliases": ["beta"]},
            {"model_id": "gamma-coder", "endpoint": "mock://scenario", "auth_env_var": "",
             "aliases": ["gamma", "gamma-coder-latest"]},
            {"model_id": "delta-coder", "endpoint": "mock://scenario", "auth_env_var": "",
             "aliases": []},
        ],
    }


def sample_tasks():
    solvers = [
        ["alpha-coder", "beta-coder", "gamma-coder", "delta-coder"],
        ["alpha-coder", "gamma-coder"],
        ["beta-coder", "gamma-coder"],
        ["alpha-coder", "beta-coder", "gamma-coder"],
        ["nobody"],
    ]
    out = []
    for i, who in enumerate(solvers):
        k = i + 2
        out.append({
            "id": f"sample-{i}",
            "statement": f"Read two integers a and b and print a * {k} + b.",
            "language": "sh",
            "visible": [{"input": "1 1", "output": str(k + 1)}],
            "hidden": [{"input": "2 3", "output": str(2 * k + 3)}, {"input": "0 5", "output": "5"}],
            "reference_solution": f"read a b\necho $((a * {k} + b))\n",
            "mock_solvable_by": who,
        })
    return out


def main():
    write_jsonl(DATA / "toy" / "tasks.jsonl", toy_tasks())
    write_jsonl(DATA / "toy" / "humaneval_sample.jsonl", humaneval_sample())
    (DATA / "selection" / "profile.txt").write_text(PROFILE + "\n")
    (DATA / "selection" / "corpus.json").write_text(json.dumps(selection_corpus(), indent=1) + "\n")
    (DATA / "selection" / "registry.json").write_text(json.dumps(registry(), indent=2) + "\n")
    write_jsonl(DATA / "selection" / "sample_tasks.jsonl", sample_tasks())


if __name__ == "__main__":
    main()
