"""Key=value experiment configuration: parsing, validation, canonical echo."""

import pytest

from heislab import (
    ConfigError,
    ExperimentConfig,
    REGISTRY_DEFAULT_SELECTION,
    build_form,
    build_projection,
    canonical_text,
    parse_config,
)


class TestDefaults:
    def test_empty_document(self):
        cfg = parse_config("")
        assert cfg == ExperimentConfig()
        assert cfg.form == "isotropic" and cfg.n == 1 and cfg.dim == 2
        assert cfg.t == (1.0,) and cfg.steps == 1000 and cfg.m == 200000
        assert cfg.seed == 42 and cfg.c_ref == 4.0 and cfg.space == "G"
        assert cfg.K == 64 and cfg.k_window == 3 and cfg.delta_t == 0.05
        assert cfg.lambdas == (0.5, 1.0, 2.0) and cfg.dims == (1, 2, 3, 4)
        assert cfg.scan_forms == ("isotropic", "ascending_weights")
        assert cfg.target_w == (3.0, 4.0) and cfg.target_c == 0.0
        assert cfg.weights is None and cfg.projection is None and cfg.out is None
        assert cfg.f == ()
        assert cfg.f_or_default() == REGISTRY_DEFAULT_SELECTION
        assert cfg.f_or_default(("cos_theta",)) == ("cos_theta",)

    def test_comments_and_blank_lines(self):
        cfg = parse_config("# a comment\n\n  t = 2.0  # trailing\n   \n")
        assert cfg.t == (2.0,)

    def test_last_duplicate_wins(self):
        assert parse_config("n = 2\nn = 3").n == 3


class TestParsing:
    def test_steps_key_is_capital_n(self):
        assert parse_config("N = 500").steps == 500

    def test_lists(self):
        cfg = parse_config(
            "t = 0.5, 1, 2\nf = poly_radial, exp_linear(0.25)\ndims = 1,2\n"
            "lambdas = 0.1,0.2\ntarget_w = 1,0"
        )
        assert cfg.t == (0.5, 1.0, 2.0)
        assert cfg.f == ("poly_radial", "exp_linear(0.25)")
        assert cfg.dims == (1, 2)
        assert cfg.lambdas == (0.1, 0.2)
        assert cfg.target_w == (1.0, 0.0)

    def test_empty_value_means_unset(self):
        cfg = parse_config("out =\nf =\nweights =\nprojection =")
        assert cfg.out is None and cfg.f == ()
        assert cfg.weights is None and cfg.projection is None

    def test_n_inferred_from_weights(self):
        cfg = parse_config("form = nonisotropic\nweights = 1, 2, 3")
        assert cfg.n == 3 and cfg.dim == 6

    def test_explicit_n_must_agree_with_weights(self):
        cfg = parse_config("form = nonisotropic\nweights = 1, 2\nn = 2")
        assert cfg.n == 2
        with pytest.raises(ConfigError, match="conflicts"):
            parse_config("form = nonisotropic\nweights = 1, 2\nn = 3")


class TestErrorCollection:
    def test_all_problems_reported_at_once(self):
        doc = "bogus = 1\nt = -1\nspace = H\nm = 1\n"
        with pytest.raises(ConfigError) as err:
            parse_config(doc)
        messages = err.value.errors
        assert len(messages) == 4
        assert "line 1" in messages[0] and "unknown key" in messages[0]
        assert any("t values must be positive" in msg for msg in messages)
        assert any("space" in msg for msg in messages)
        assert any("m must be >= 2" in msg for msg in messages)
        assert isinstance(err.value, ValueError)

    @pytest.mark.parametrize(
        "doc,needle",
        [
            ("just words", "expected `key = value`"),
            ("t =", "needs a value"),
            ("t = 1,,2", "bad value"),
            ("t = inf", "bad value"),
            ("t = nan", "bad value"),
            ("N = ten", "bad value"),
            ("seed = -1", "seed"),
            ("seed = 18446744073709551616", "seed"),
            ("K = 1", "K must be >= 2"),
            ("k_window = -1", "k_window"),
            ("delta_t = 0", "delta_t"),
            ("c_ref = 0", "c_ref"),
            ("dims = 0,1", "dims"),
            ("n = 0", "n must be >= 1"),
            ("form = diagonal", "form must be one of"),
            ("weights = 1,2", "weights apply only"),
            ("form = nonisotropic", "requires the `weights` key"),
            ("form = nonisotropic\nweights = 1,-2", "weights must be positive"),
            ("scan_forms = isotropic,diagonal", "unknown form family"),
            ("f = poly_radial,nope", "bad f selector"),
        ],
    )
    def test_single_problems(self, doc, needle):
        with pytest.raises(ConfigError) as err:
            parse_config(doc)
        assert any(needle in msg for msg in err.value.errors), err.value.errors


class TestProjectionValidation:
    def test_valid_sub_projection(self):
        cfg = parse_config("n = 2\nprojection = 3, 4")
        assert cfg.projection == (3, 4)
        _, form = build_form(cfg)
        assert build_projection(cfg, form).indices == (3, 4)

    def test_default_projection_is_full(self):
        cfg = parse_config("n = 2")
        _, form = build_form(cfg)
        assert build_projection(cfg, form).indices == (1, 2, 3, 4)

    @pytest.mark.parametrize(
        "doc,needle",
        [
            ("n = 2\nprojection = 1, 3", "bracket-generation"),
            ("n = 2\nprojection = 1, 6", "exceeds dimension"),
            ("n = 2\nprojection = 1, 2, 3", "even"),
            ("n = 2\nprojection = 2, 1", "ascending"),
        ],
    )
    def test_rejected_projections(self, doc, needle):
        with pytest.raises(ConfigError) as err:
            parse_config(doc)
        assert any(needle in msg for msg in err.value.errors), err.value.errors


class TestBuildForm:
    def test_isotropic(self):
        model, form = build_form(parse_config("n = 3"))
        assert model is None and form.n == 3 and form.omega[0, 1] == 1.0

    def test_nonisotropic(self):
        model, form = build_form(parse_config("form = nonisotropic\nweights = 2, 5"))
        assert model is None
        assert form.omega[0, 1] == 2.0 and form.omega[2, 3] == 5.0

    def test_trace_class(self):
        cfg = parse_config("form = trace_class\nweights = 1, 0.5")
        model, form = build_form(cfg)
        assert model is not None
        assert model.dim == 4
        assert form.omega[0, 1] == 1.0 and form.omega[2, 3] == 0.5


class TestCanonicalText:
    def test_roundtrip_and_shape(self):
        cfg = parse_config("")
        text = canonical_text(cfg)
        lines = text.strip().split("\n")
        assert len(lines) == 20
        assert lines[0].startswith("K = ")
        assert lines == sorted(lines, key=lambda ln: ln.split(" = ")[0])
        assert parse_config(text) == cfg
        assert canonical_text(parse_config(text)) == text

    @pytest.mark.parametrize(
        "doc",
        [
            "form = nonisotropic\nweights = 1.5, 2.25\nt = 0.1, 1, 10\nm = 50",
            "f = exp_linear(0.5), cos_theta\nspace = Gtilde\nseed = 7",
            "n = 4\nprojection = 1, 2, 5, 6\nout = results",
            "form = trace_class\nweights = 1, 0.5\ndelta_t = 0.001",
        ],
    )
    def test_roundtrip_nontrivial(self, doc):
        cfg = parse_config(doc)
        assert parse_config(canonical_text(cfg)) == cfg

    def test_float_echo_is_exact(self):
        cfg = parse_config("t = 0.30000000000000004")
        assert "t = 0.30000000000000004" in canonical_text(cfg)
