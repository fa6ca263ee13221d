import json

import numpy as np
import pytest

from bcbound.cli import main
from bcbound.formats import channel_to_json, scheme_to_json
from bcbound.probcore import bsc_pair, product_channel, random_channel
from bcbound.schemes import product_scheme, singleton_private


@pytest.fixture
def files(tmp_path):
    paths = {}

    def put(name, text):
        p = tmp_path / name
        p.write_text(text if isinstance(text, str) else json.dumps(text))
        paths[name] = str(p)
        return str(p)

    put("product.json", channel_to_json(product_channel()))
    put("bsc.json", channel_to_json(bsc_pair(0.1, 0.2)))
    put("random.json", channel_to_json(random_channel(2, 2, 2, np.random.default_rng(7))))
    put("scheme.json", scheme_to_json(product_scheme()))
    put("degenerate.json", scheme_to_json(singleton_private([0.25] * 4)))
    put("small.json", {"cards": [2, 2, 1, 1], "restarts": 1, "seed": 0})
    put("identity.json", {"kind": "identity"})
    put("random_code.json", {"kind": "random", "seed": 3})
    paths["dir"] = tmp_path
    paths["put"] = put
    return paths


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_info_product(files, capsys):
    code, out, err = run(capsys, "info", files["product.json"], files["scheme.json"])
    assert code == 0
    assert "R1     1\n" in out and "R2     1\n" in out and "residual_inf 0\n" in out
    assert err.startswith("# config ")


def test_info_degenerate(files, capsys):
    code, out, _ = run(capsys, "info", files["product.json"], files["degenerate.json"])
    assert code == 0
    table = [ln for ln in out.splitlines() if ln.startswith("I(")]
    assert len(table) == 7 and all(ln.endswith(",0,0,0") for ln in table)


def test_info_bad_channel(files, capsys):
    law = product_channel().law.tolist()
    law[2] = [[0.45, 0.0], [0.45, 0.0]]  # sums to 0.9
    bad = files["put"]("bad.json", {"x": 4, "y1": 2, "y2": 2, "law": law})
    code, _, err = run(capsys, "info", bad, files["scheme.json"])
    assert code == 2 and "x=2" in err


def test_scan_product_corner(files, capsys, tmp_path):
    out_csv = tmp_path / "scan.csv"
    code, _, err = run(capsys, "scan", files["product.json"], "--cards", "2,2,1,1", "--out", out_csv,
                       "--frontier", tmp_path / "front.csv")
    assert code == 0
    lines = out_csv.read_text().splitlines()
    assert lines[0] == "lambda1,lambda2,R1,R2,residual_inf,seed"
    rates = [tuple(map(float, ln.split(",")[2:4])) for ln in lines[1:]]
    assert any(r1 >= 0.99 and r2 >= 0.99 for r1, r2 in rates)
    assert "# attempts" in err
    assert (tmp_path / "front.csv").read_text().startswith("R1,R2\n")


def test_scan_deterministic(files, capsys):
    outs = [run(capsys, "scan", files["random.json"], "--config", files["small.json"])[1] for _ in range(2)]
    assert outs[0] == outs[1] and outs[0]


def test_scan_restarts_zero(files, capsys):
    cfg = files["put"]("zero.json", {"restarts": 0})
    code, _, err = run(capsys, "scan", files["random.json"], "--config", cfg)
    assert code == 2 and "restarts" in err


def test_claim1_product(files, capsys):
    code, out, err = run(capsys, "claim", files["product.json"], "--cards", "2,2,1,1", "--seed", "1")
    assert code == 0
    assert out.splitlines()[0].endswith("min_slack,argmin,verdict")
    assert "failures 0" in err


def test_claim2_literal_flags(files, capsys):
    cfg = files["put"]("c2.json", {"cards": [2, 2, 2, 2, 2], "restarts": 2, "seed": 0,
                                   "sweep": [[1, 1, 1]]})
    code_c, out_c, _ = run(capsys, "claim", files["random.json"], "--which", "claim2", "--config", cfg)
    code_l, out_l, _ = run(capsys, "claim", files["random.json"], "--which", "claim2", "--config", cfg,
                           "--mode", "literal")
    assert code_c == 0
    assert "mode_dependent" in out_c.splitlines()[0]
    # the literal reading is a different inequality set, so its verdicts may differ
    assert code_l in (0, 4)


def test_claim_report(files, capsys, tmp_path):
    rep = tmp_path / "rep.json"
    code, _, _ = run(capsys, "claim", files["bsc.json"], "--config", files["small.json"], "--report", rep)
    d = json.loads(rep.read_text())
    assert code == 0 and d["verdicts"]["pass"] and d["seed"] == 0


def test_prove_examples(files, capsys):
    assert run(capsys, "prove", "I(A;B) >= 0")[0] == 0
    code, out, _ = run(capsys, "prove", "-H(A) >= 0")
    assert code == 5 and "H(A) = 1" in out
    cons = files["put"]("dp.txt", "# Markov chain A - B - C\nI(A;C|B) = 0\n")
    assert run(capsys, "prove", "I(A;C) <= I(A;B)", "--constraints", cons)[0] == 0
    assert run(capsys, "prove", "I(A;B) = I(B;A)")[0] == 0


def test_prove_parse_error(capsys):
    code, _, err = run(capsys, "prove", "I(A;B >= 0")
    assert code == 2 and err.startswith("# config") and "error:" in err


def test_prove_fixture(capsys):
    code, out, _ = run(capsys, "prove", "--fixture", "claim1")
    assert code == 0
    assert out.count("ShannonProvable") >= 14


def test_prove_bundled_constraints(capsys):
    code, _, _ = run(capsys, "prove", "I(U;Y1|W1) + I(V;Y2|W2) <= I(W1,W2;Y1) + I(U;Y1|W1,W2) + I(V;Y2|U,W1,W2)",
                     "--constraints", "@claim1")
    assert code == 0


def test_multiletter_identity(files, capsys):
    code, out, _ = run(capsys, "multiletter", files["identity.json"], files["product.json"], "--n", "2")
    assert code == 0 and "FAIL" not in out
    assert "receiver1=True receiver2=True" in out


def test_multiletter_random_bsc(files, capsys):
    code, out, _ = run(capsys, "multiletter", files["random_code.json"], files["bsc.json"], "--n", "2")
    assert code == 0
    assert "identified residual_1" in out and "telescope" in out


def test_multiletter_cap(files, capsys):
    code, _, err = run(capsys, "multiletter", files["identity.json"], files["product.json"], "--n", "9")
    assert code == 3 and "cap" in err


def test_bad_cards_flag(files, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["scan", files["product.json"], "--cards", "2,2"])
    assert exc.value.code == 2
