"""Regenerates the corpus fixtures under tests/fixtures.

Expected outputs come from the Python oracles below, written independently of
the solution sources stored in the corpora.

    python3 tests/fixtures/make_fixtures.py
"""

import json
import math
import os
import textwrap

HERE = os.path.dirname(os.path.abspath(__file__))


def write(path, text):
    path = os.path.join(HERE, path)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w") as f:
        f.write(text)


def jsonl(rows):
    return "".join(json.dumps(r) + "\n" for r in rows)


def record(pid, question, solutions, tests, difficulty, source):
    r = {"id": pid, "question": question, "solutions": solutions}
    if tests is not None:
        r["input_output"] = {
            "inputs": [i for i, _ in tests],
            "outputs": [o for _, o in tests],
        }
    r["difficulty"] = difficulty
    r["source"] = source
    return r


# --- self-consistency corpus -------------------------------------------------

def fmt_float(x):
    return "%.6f\n" % x


SELFCHECK = [
    ("sum-two", "Print the sum of two integers a and b.",
     ["a, b = map(int, input().split())\nprint(a + b)\n"],
     ["1 2\n", "-5 5\n", "1000000000 1000000000\n"],
     lambda s: "%d\n" % sum(map(int, s.split())), "introductory"),
    ("max-of-list", "Given n and n integers, print the largest.",
     ["n = int(input())\nprint(max(map(int, input().split())))\n",
      "input()\nbest = None\nfor v in map(int, input().split()):\n    if best is None or v > best:\n        best = v\nprint(best)\n"],
     ["3\n1 9 4\n", "1\n-7\n", "5\n-1 -2 -3 -4 -5\n"],
     lambda s: "%d\n" % max(map(int, s.split("\n")[1].split())), "introductory"),
    ("reverse-word", "Print the given word reversed.",
     ["print(input().strip()[::-1])\n"],
     ["abc\n", "a\n", "racecar\n"],
     lambda s: s.strip()[::-1] + "\n", "introductory"),
    ("count-vowels", "Count the vowels (aeiou) in a lowercase string.",
     ["s = input()\nprint(sum(ch in 'aeiou' for ch in s))\n"],
     ["hello\n", "rhythm\n", "aeiouaeiou\n"],
     lambda s: "%d\n" % len([c for c in s.strip() if c in "aeiou"]), "introductory"),
    ("factorial", "Print n! for 0 <= n <= 20.",
     ["import math\nprint(math.factorial(int(input())))\n",
      "n = int(input())\nr = 1\nfor i in range(2, n + 1):\n    r *= i\nprint(r)\n"],
     ["0\n", "5\n", "20\n"],
     lambda s: "%d\n" % math.factorial(int(s)), "introductory"),
    ("fibonacci", "Print the n-th Fibonacci number with F(0) = 0 and F(1) = 1.",
     ["n = int(input())\na, b = 0, 1\nfor _ in range(n):\n    a, b = b, a + b\nprint(a)\n"],
     ["0\n", "10\n", "90\n"],
     None, "interview"),
    ("gcd", "Print the greatest common divisor of a and b.",
     ["import math\na, b = map(int, input().split())\nprint(math.gcd(a, b))\n",
      "a, b = map(int, input().split())\nwhile b:\n    a, b = b, a % b\nprint(a)\n"],
     ["12 18\n", "7 13\n", "100 10\n"],
     lambda s: "%d\n" % math.gcd(*map(int, s.split())), "introductory"),
    ("is-prime", "Print YES if n is prime and NO otherwise.",
     ["n = int(input())\nok = n > 1 and all(n % d for d in range(2, int(n ** 0.5) + 1))\nprint('YES' if ok else 'NO')\n"],
     ["1\n", "2\n", "97\n", "91\n"],
     None, "interview"),
    ("sort-numbers", "Print the n integers in non-decreasing order.",
     ["input()\nprint(*sorted(map(int, input().split())))\n"],
     ["4\n3 1 2 2\n", "1\n5\n", "3\n-1 -10 7\n"],
     lambda s: " ".join(map(str, sorted(map(int, s.split("\n")[1].split())))) + "\n", "introductory"),
    ("palindrome", "Print YES if the string reads the same backwards.",
     ["s = input().strip()\nprint('YES' if s == s[::-1] else 'NO')\n"],
     ["abba\n", "abc\n", "x\n"],
     lambda s: ("YES" if s.strip() == s.strip()[::-1] else "NO") + "\n", "introductory"),
    ("circle-area", "Print the area of a circle of radius r with six decimals.",
     ["import math\nr = float(input())\nprint('%.6f' % (math.pi * r * r))\n"],
     ["1\n", "2.5\n", "0\n"],
     lambda s: fmt_float(math.pi * float(s) ** 2), "introductory"),
    ("average", "Print the mean of n integers.",
     ["n = int(input())\nv = list(map(int, input().split()))\nprint(sum(v) / n)\n"],
     ["2\n1 2\n", "3\n1 1 1\n", "4\n1 2 3 5\n"],
     lambda s: repr(sum(map(int, s.split("\n")[1].split())) / int(s.split("\n")[0])) + "\n", "interview"),
    ("lis", "Length of the longest strictly increasing subsequence.",
     ["import bisect\ninput()\ntails = []\nfor v in map(int, input().split()):\n    i = bisect.bisect_left(tails, v)\n    if i == len(tails):\n        tails.append(v)\n    else:\n        tails[i] = v\nprint(len(tails))\n"],
     ["6\n10 9 2 5 3 7\n", "1\n4\n", "5\n5 4 3 2 1\n"],
     None, "competition"),
    ("grid-paths", "Count monotone lattice paths in an n x m grid modulo 1000000007.",
     ["n, m = map(int, input().split())\nrow = [1] * m\nfor _ in range(1, n):\n    for j in range(1, m):\n        row[j] = (row[j] + row[j - 1]) % 1000000007\nprint(row[-1])\n"],
     ["1 1\n", "3 3\n", "10 10\n"],
     lambda s: "%d\n" % (math.comb(sum(map(int, s.split())) - 2, int(s.split()[0]) - 1) % 1000000007), "interview"),
    ("word-count", "Print the number of words on the line.",
     ["print(len(input().split()))\n"],
     ["a b c\n", "single\n", "  spaced   out  \n"],
     lambda s: "%d\n" % len(s.split()), "introductory"),
    ("binary", "Print n in binary.",
     ["print(bin(int(input()))[2:])\n"],
     ["0\n", "5\n", "1024\n"],
     lambda s: format(int(s), "b") + "\n", "introductory"),
    ("knapsack", "0/1 knapsack: n items with weight and value, capacity W; print the best value.",
     ["n, w = map(int, input().split())\nbest = [0] * (w + 1)\nfor _ in range(n):\n    wt, val = map(int, input().split())\n    for c in range(w, wt - 1, -1):\n        best[c] = max(best[c], best[c - wt] + val)\nprint(best[w])\n"],
     ["3 5\n2 3\n3 4\n4 5\n", "1 1\n2 10\n", "2 10\n5 10\n5 10\n"],
     None, "competition"),
    ("two-sum-count", "Count pairs i < j with a_i + a_j = k.",
     ["n, k = map(int, input().split())\nseen = {}\ncount = 0\nfor v in map(int, input().split()):\n    count += seen.get(k - v, 0)\n    seen[v] = seen.get(v, 0) + 1\nprint(count)\n"],
     ["4 5\n1 4 2 3\n", "3 2\n1 1 1\n", "2 0\n1 2\n"],
     None, "competition"),
    ("untestable-a", "A problem shipped without tests.",
     ["print(42)\n"], None, None, "unknown"),
    ("untestable-b", "Another problem shipped without tests.",
     ["print(input())\n"], None, None, "unknown"),
]

BRUTE = {
    "fibonacci": lambda s: "%d\n" % fib(int(s)),
    "is-prime": lambda s: ("YES" if is_prime(int(s)) else "NO") + "\n",
    "lis": lambda s: "%d\n" % lis_brute(list(map(int, s.split("\n")[1].split()))),
    "knapsack": lambda s: "%d\n" % knapsack_brute(s),
    "two-sum-count": lambda s: "%d\n" % pairs_brute(s),
}


def fib(n):
    if n < 2:
        return n
    m = [[1, 1], [1, 0]]
    r = [[1, 0], [0, 1]]
    while n:
        if n & 1:
            r = matmul(r, m)
        m = matmul(m, m)
        n >>= 1
    return r[0][1]


def matmul(a, b):
    return [[sum(a[i][k] * b[k][j] for k in range(2)) for j in range(2)] for i in range(2)]


def is_prime(n):
    return n > 1 and not any(n % d == 0 for d in range(2, n))


def lis_brute(v):
    best = 0
    for mask in range(1 << len(v)):
        sub = [v[i] for i in range(len(v)) if mask >> i & 1]
        if all(a < b for a, b in zip(sub, sub[1:])):
            best = max(best, len(sub))
    return best


def knapsack_brute(s):
    lines = s.split("\n")
    n, w = map(int, lines[0].split())
    items = [tuple(map(int, lines[1 + i].split())) for i in range(n)]
    best = 0
    for mask in range(1 << n):
        wt = sum(items[i][0] for i in range(n) if mask >> i & 1)
        if wt <= w:
            best = max(best, sum(items[i][1] for i in range(n) if mask >> i & 1))
    return best


def pairs_brute(s):
    lines = s.split("\n")
    _, k = map(int, lines[0].split())
    v = list(map(int, lines[1].split()))
    return sum(1 for i in range(len(v)) for j in range(i + 1, len(v)) if v[i] + v[j] == k)


def selfcheck():
    rows = []
    for pid, question, sols, inputs, oracle, difficulty in SELFCHECK:
        tests = None
        if inputs is not None:
            oracle = oracle or BRUTE[pid]
            tests = [(i, oracle(i)) for i in inputs]
        rows.append(record(pid, question, sols, tests, difficulty, "selfcheck"))
    assert len(rows) == 20
    write("selfcheck/test.jsonl", jsonl(rows))


# --- end-to-end corpus -------------------------------------------------------

# (id, statement, body computing `ans` from `tokens`, inputs, oracle)
TRAIN = [
    ("T01", "add the two numbers", "ans = int(tokens[0]) + int(tokens[1])",
     ["1 2", "10 -3"], lambda t: int(t[0]) + int(t[1])),
    ("T02", "multiply the two numbers", "ans = int(tokens[0]) * int(tokens[1])",
     ["3 4", "-2 8"], lambda t: int(t[0]) * int(t[1])),
    ("T03", "print the smallest of the given numbers", "ans = min(map(int, tokens))",
     ["5 3 9", "7"], lambda t: min(map(int, t))),
    ("T04", "print how many numbers are even", "ans = sum(int(x) % 2 == 0 for x in tokens)",
     ["1 2 3 4", "7 9"], lambda t: len([x for x in t if int(x) % 2 == 0])),
    ("T05", "print the given words joined by dashes", "ans = '-'.join(tokens)",
     ["a b c", "solo"], lambda t: "-".join(t)),
    ("T06", "print the length of the first word", "ans = len(tokens[0])",
     ["hello world", "x"], lambda t: len(t[0])),
    ("T07", "print the sum of squares of the numbers", "ans = sum(int(x) ** 2 for x in tokens)",
     ["1 2 3", "10"], lambda t: sum(int(x) * int(x) for x in t)),
    ("T08", "print the difference of the largest and smallest number",
     "values = [int(x) for x in tokens]\nans = max(values) - min(values)",
     ["4 1 7", "5 5"], lambda t: max(map(int, t)) - min(map(int, t))),
    ("T09", "print the number of distinct words", "ans = len(set(tokens))",
     ["a b a c", "z z z"], lambda t: len(set(t))),
    ("T10", "print the product of all numbers modulo 1000",
     "ans = 1\nfor x in tokens:\n    ans = ans * int(x) % 1000",
     ["2 3 4", "999 999"], lambda t: math.prod(int(x) for x in t) % 1000),
]

TEST = [
    ("E01", "print the larger of two numbers", ["3 8", "-1 -9"], lambda t: max(map(int, t)), "introductory"),
    ("E02", "print the sum of all numbers", ["1 2 3", "100"], lambda t: sum(map(int, t)), "introductory"),
    ("E03", "print the number of words", ["a b c", "x"], lambda t: len(t), "introductory"),
    ("E04", "print the first word in upper case", ["hi there", "ok"], lambda t: t[0].upper(), "introductory"),
    ("E05", "print the count of numbers greater than the first one",
     ["3 1 4 5", "9 1 2"], lambda t: len([x for x in t[1:] if int(x) > int(t[0])]), "interview"),
    ("E06", "print the numbers in reverse order", ["1 2 3", "7"], lambda t: " ".join(reversed(t)), "interview"),
    ("E07", "print the sum of the even numbers", ["1 2 3 4", "5"], lambda t: sum(int(x) for x in t if int(x) % 2 == 0), "interview"),
    ("E08", "print the number of inversions in the sequence",
     ["3 1 2", "1 2 3"], lambda t: sum(1 for i in range(len(t)) for j in range(i + 1, len(t)) if int(t[i]) > int(t[j])), "competition"),
    ("E09", "print the median of an odd-length sequence", ["5 1 3", "7"], lambda t: sorted(map(int, t))[len(t) // 2], "competition"),
    ("E10", "Print the product of all numbers modulo 1000.", ["2 5 7", "10 10 10"], lambda t: math.prod(int(x) for x in t) % 1000, "competition"),
]

# Candidate programs for the test split. Two per problem.
FLAT = "import sys\ntokens = sys.stdin.read().split()\n{body}\nprint(ans)\n"
MODULAR = (
    "import sys\n\n\ndef read_tokens():\n    return sys.stdin.read().split()\n\n\n"
    "def solve(tokens):\n{body}\n    return ans\n\n\nprint(solve(read_tokens()))\n"
)
WRONG = "print(0)\n"

TEST_BODIES = {
    "E01": "ans = max(int(tokens[0]), int(tokens[1]))",
    "E02": "ans = sum(int(x) for x in tokens)",
    "E03": "ans = len(tokens)",
    "E04": "ans = tokens[0].upper()",
    "E05": "ans = sum(int(x) > int(tokens[0]) for x in tokens[1:])",
    "E06": "ans = ' '.join(reversed(tokens))",
    "E07": "ans = sum(int(x) for x in tokens if int(x) % 2 == 0)",
    "E08": "v = [int(x) for x in tokens]\nans = sum(v[i] > v[j] for i in range(len(v)) for j in range(i + 1, len(v)))",
    "E09": "ans = sorted(int(x) for x in tokens)[len(tokens) // 2]",
    "E10": "ans = 1\nfor x in tokens:\n    ans = ans * int(x) % 1000",
}

# Per problem: (first candidate kind, second candidate kind).
CANDIDATE_PLAN = {
    "E01": ("flat", "modular"),
    "E02": ("modular", "modular"),
    "E03": ("flat", "wrong"),
    "E04": ("wrong", "modular"),
    "E05": ("modular", "wrong"),
    "E06": ("wrong", "wrong"),
    "E07": ("wrong", "wrong"),
    "E08": ("wrong", "wrong"),
    "E09": ("wrong", "wrong"),
    "E10": ("flat", "flat"),
}


def task(pid, statement):
    return "Task %s: %s. The input is one line of whitespace-separated tokens." % (pid, statement)


def flat(body):
    return FLAT.format(body=body)


def modular(body):
    return MODULAR.format(body=textwrap.indent(body, "    "))


def fenced(code):
    return "```python\n" + code.rstrip("\n") + "\n```\n"


def mot_response(body, broken=None):
    outline = (
        "import sys\n\n\n"
        "def read_tokens():\n"
        '    """Read every whitespace-separated token from standard input.\n\n'
        "    Returns:\n        list[str]: the tokens in input order.\n"
        '    """\n\n\n'
        "def solve(tokens):\n"
        '    """Compute the answer from the input tokens.\n\n'
        "    Args:\n        tokens (list[str]): the input tokens.\n"
        "    Returns:\n        int | str: the value to print.\n"
        '    """\n'
    )
    final = (
        "import sys\n\n\n"
        "def read_tokens():\n"
        '    """Read every whitespace-separated token from standard input."""\n'
        "    return sys.stdin.read().split()\n\n\n"
        "def solve(tokens):\n"
        '    """Compute the answer from the input tokens."""\n'
        + textwrap.indent(body, "    ") + "\n    return ans\n\n\n"
        "def main():\n"
        "    print(solve(read_tokens()))\n\n\n"
        "main()\n"
    )
    if broken == "implemented-outline":
        outline = outline.replace('    """\n\n\ndef solve', '    """\n    return sys.stdin.read().split()\n\n\ndef solve', 1)
    text = "Here is the modular rewrite.\n\n### STEP 1\n" + fenced(outline) + "\n### STEP 2\n" + fenced(final)
    if broken == "two-main":
        text += "\nAn alternative version:\n\n" + fenced(final)
    return text


def clean_response(body, broken=None):
    if broken == "wrong":
        body = body + "\nans = 0"
    code = (
        "import sys\n\n"
        "# all whitespace-separated tokens of the single input line\n"
        "tokens = sys.stdin.read().split()\n"
        "# compute the answer\n" + body + "\n"
        "print(ans)\n"
    )
    return "The cleaned program:\n\n" + fenced(code)


def e2e():
    train = []
    for pid, statement, body, inputs, oracle in TRAIN:
        q = task(pid, statement)
        if pid == "T10":
            q = "Task E10: Print   the product of ALL numbers modulo 1000.  The input is one line of whitespace-separated tokens."
        tests = [(i + "\n", "%s\n" % oracle(i.split())) for i in inputs]
        train.append(record(pid, q, [flat(body)], tests, "interview", "apps" if pid < "T06" else "codecontests"))
    write("e2e/train.jsonl", jsonl(train))

    test = []
    for pid, statement, inputs, oracle, difficulty in TEST:
        q = task(pid, statement.rstrip("."))
        tests = [(i + "\n", "%s\n" % oracle(i.split())) for i in inputs]
        test.append(record(pid, q, [flat(TEST_BODIES[pid])], tests, difficulty, "apps"))
    write("e2e/test.jsonl", jsonl(test))

    candidates = {}
    for pid, plan in CANDIDATE_PLAN.items():
        body = TEST_BODIES[pid]
        kinds = {"flat": flat(body), "modular": modular(body), "wrong": WRONG}
        candidates[pid] = [kinds[k] for k in plan]
    write("e2e/candidates.json", json.dumps(candidates, indent=2) + "\n")

    rules = []
    files = {}

    def add(contains, name, text):
        files[name] = text
        rules.append({"contains": contains, "response_file": name})

    # Transformation replies.
    broken_mot = {"T04": "two-main", "T07": "implemented-outline"}
    broken_clean = {"T09": "wrong"}
    for pid, _, body, _, _ in TRAIN[:-1]:
        add(["Task %s:" % pid, "in two steps"], "mot_%s.txt" % pid, mot_response(body, broken_mot.get(pid)))
        add(["Task %s:" % pid, "with these goals"], "clean_%s.txt" % pid, clean_response(body, broken_clean.get(pid)))

    # Reflection replies: E06 fixed in round 1, E07 in round 2, E08 never,
    # E09 already right on the fresh attempt.
    right = {pid: fenced(flat(TEST_BODIES[pid])) for pid in ("E06", "E07", "E08", "E09")}
    wrong = "Let me try.\n\n" + fenced(WRONG)
    add(["Task E06:", "Reflection round 1 of"], "reflect_E06_fixed.txt", right["E06"])
    add(["Task E07:", "Reflection round 2 of"], "reflect_E07_fixed.txt", right["E07"])
    add(["Task E09:", "Write a complete Python 3 program"], "direct_E09.txt", right["E09"])
    add(["Write a complete Python 3 program"], "direct_wrong.txt", wrong)
    add(["Reflection round"], "reflect_wrong.txt", wrong)

    for name, text in files.items():
        write("e2e/mock/" + name, text)
    write("e2e/mock/mock.json", json.dumps({"rules": rules}, indent=2) + "\n")

    config = {
        "corpus": {"train": "train.jsonl", "test": "test.jsonl"},
        "provider": {"model_name": "mock-model", "cache_dir": "out/cache", "max_inflight": 4},
        "limits": {"wall_time": 5.0, "memory_bytes": 268435456, "output_cap_bytes": 1048576},
        "ks": [1, 2],
        "max_reflection_rounds": 5,
        "outdir": "out",
        "workers": 4,
    }
    write("e2e/config.json", json.dumps(config, indent=2) + "\n")


if __name__ == "__main__":
    selfcheck()
    e2e()
