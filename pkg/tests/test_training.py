import copy
import io
import math

import numpy as np
import pytest

from targetgan import numcore as nc
from targetgan.chem import MolMatrices, parse_smiles, to_matrices, write_matrices
from targetgan.metrics import fingerprint, murcko_scaffold
from targetgan.nets import Condition, ModelConfig, VariantMismatch
from targetgan.nets.discriminator import Discriminator
from targetgan.numcore import Tape, Tensor
from targetgan.training import (
    METRIC_HEADER,
    CheckpointCorrupt,
    ConfigError,
    DataError,
    DataExhausted,
    EmptyBatch,
    GANModel,
    MolSet,
    NonFiniteLoss,
    Route,
    TrainConfig,
    Trainer,
    Variant,
    critic_loss,
    decode_checkpoint,
    encode_checkpoint,
    epoch_batches,
    generate,
    generator_loss,
    gradient_penalty,
    load_bundle,
    load_checkpoint,
    load_config,
    parse_config_text,
    read_molecules,
    reinforce_surrogate,
    rl_scaffold_penalty,
    sample_log_prob,
    sample_z,
    split_indices,
    toy_molecules,
    train,
    wgan_losses,
)
from targetgan.training.checkpoint import model_tensors

from conftest import DATA, INHIBITORS, tiny_train_config, toy_bundle
from oracles import bitset_tanimoto, gp_value, mlp_input_grad


# ---------------------------------------------------------------------------
# config


def test_config_defaults_follow_training_recipe():
    cfg = TrainConfig()
    assert (cfg.lr, cfg.batch, cfg.epochs, cfg.beta1, cfg.beta2) == (1e-5, 128, 50, 0.9, 0.999)
    assert (cfg.lambda_gp, cfg.rl_coeff, cfg.warmup_epochs, cfg.split_ratio) == (10.0, 0.1, 10, 0.9)


def test_config_text_round_trip():
    cfg = tiny_train_config(variant="Prot", route="warmup", seed=7)
    back = TrainConfig.from_mapping(parse_config_text(cfg.to_text()))
    assert back == cfg
    assert back.variant is Variant.PROT and back.route is Route.WARMUP


def test_config_comments_and_case():
    values = parse_config_text("# run\nvariant = crossloss\nlr=0.001\n\nbatch = 8\n")
    cfg = TrainConfig.from_mapping(values)
    assert cfg.variant is Variant.CROSSLOSS and cfg.lr == 0.001 and cfg.batch == 8


@pytest.mark.parametrize("text", ["lr = -1", "split_ratio = 1.0", "variant = Unknown", "colour = red",
                                  "batch = many", "route = sideways", "rl_stages = g1", "heads = 3"])
def test_config_errors(text):
    with pytest.raises(ConfigError):
        TrainConfig.from_mapping(parse_config_text(text))


def test_load_config_resolves_paths_and_overrides(tmp_path):
    (tmp_path / "sub").mkdir()
    p = tmp_path / "sub" / "run.cfg"
    p.write_text("general = mols.smi\nepochs = 3\n")
    cfg = load_config(p, {"epochs": "5", "seed": 2})
    assert cfg.general == str(tmp_path / "sub" / "mols.smi")
    assert cfg.epochs == 5 and cfg.seed == 2
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.cfg")


@pytest.mark.parametrize("variant,two,kind,inh", [
    ("Prot", True, "pocket", True), ("CrossLoss", False, None, True), ("Ligand", True, "ligand", True),
    ("RL", True, "ligand", True), ("NoTarget", False, None, False)])
def test_variant_properties(variant, two, kind, inh):
    v = Variant(variant)
    assert (v.two_stage, v.cond_kind, v.needs_inhibitors) == (two, kind, inh)


# ---------------------------------------------------------------------------
# data


def test_split_partition():
    rng = np.random.default_rng(0)
    tr, te = split_indices(101, 0.9, rng)
    assert len(tr) == 90 and len(te) == 11
    assert set(tr) | set(te) == set(range(101)) and not set(tr) & set(te)
    tr2, _ = split_indices(101, 0.9, np.random.default_rng(0))
    assert np.array_equal(tr, tr2)


def test_epoch_batches_drop_partial():
    batches = epoch_batches(np.arange(10), 4, np.random.default_rng(0))
    assert [len(b) for b in batches] == [4, 4]
    assert len(set(np.concatenate(batches))) == 8
    with pytest.raises(DataExhausted):
        epoch_batches(np.arange(3), 4, np.random.default_rng(0))


def test_trainer_rejects_tiny_split():
    cfg = tiny_train_config(batch=32)
    with pytest.raises(DataExhausted):
        Trainer(cfg, toy_bundle(cfg, n=20))


def test_read_molecules_smiles_and_molm(tmp_path):
    smi = tmp_path / "m.smi"
    smi.write_text("CCO\nc1ccccc1\n")
    assert [len(g) for g in read_molecules(smi)] == [3, 6]
    molm = tmp_path / "m.molm"
    with open(molm, "wb") as fh:
        for s in ("CCO", "CN"):
            write_matrices(fh, to_matrices(parse_smiles(s)))
    assert [len(g) for g in read_molecules(molm)] == [3, 2]


@pytest.mark.parametrize("text", ["", "C" * 12 + "\n", "CC(C)(C)(C)C\n", "C1CC\n"])
def test_read_molecules_errors(tmp_path, text):
    p = tmp_path / "bad.smi"
    p.write_text(text)
    with pytest.raises(DataError):
        read_molecules(p, max_atoms=10)


def test_load_bundle_requires_variant_inputs(tmp_path):
    p = tmp_path / "g.smi"
    p.write_text("CCO\nCCN\n")
    with pytest.raises(DataError):
        load_bundle(tiny_train_config(variant="Ligand", general=str(p)))
    with pytest.raises(DataError):
        load_bundle(tiny_train_config(variant="Prot", general=str(p), inhibitors=str(p)))
    b = load_bundle(tiny_train_config(general=str(p)))
    assert len(b.general) == 2 and b.inhibitors is None


def test_pocket_row_count_must_match_config():
    cfg = tiny_train_config(variant="Prot")
    bundle = toy_bundle(cfg)
    with pytest.raises(DataError):
        Trainer(cfg.replace(pocket_atoms=40), bundle)


def test_toy_molecules_are_valid():
    from targetgan.chem import check_validity
    gs = toy_molecules(300, np.random.default_rng(1), 8)
    assert all(check_validity(g) and 2 <= len(g) <= 8 for g in gs)


# ---------------------------------------------------------------------------
# adversarial losses


def _model(variant="NoTarget", max_atoms=3, disc=(4, 1), seed=0):
    mcfg = ModelConfig.tiny(depth=1, model_dim=8, heads=2, max_atoms=max_atoms, pocket_atoms=30,
                            embed_hidden=4, disc_sizes=disc)
    return GANModel(mcfg, Variant(variant), np.random.default_rng(seed))


def _real(model, smiles, b):
    m = to_matrices(parse_smiles(smiles), model.config.max_atoms)
    return (np.repeat(m.annotation[None].astype(float), b, 0),
            np.repeat(m.adjacency[None].astype(float), b, 0))


def _cond(model, b):
    mset = MolSet.from_graphs([parse_smiles("CO")], model.config.max_atoms)
    return Condition("ligand", *mset.onehot(np.zeros(b, dtype=int)))


@pytest.mark.parametrize("variant", ["NoTarget", "Ligand"])
def test_zero_weight_discriminators_give_zero_estimates(variant):
    m = _model(variant)
    for name in ("d1", "d2"):
        if getattr(m, name) is not None:
            for p in getattr(m, name).parameters().values():
                p.data[:] = 0.0
    rng = np.random.default_rng(0)
    real = _real(m, "CCO", 2)
    out = wgan_losses(m, real, real, sample_z(m.config, 2, rng), _cond(m, 2))
    assert out.wasserstein_estimates == (0.0, 0.0)
    for t in (out.loss_d1, out.loss_d2, out.loss_g1, out.loss_g2):
        assert float(t.data) == 0.0


def test_constant_critic_outputs_estimate_two():
    # +1 on all-ones inputs, -1 on all-zeros inputs
    def d(a, b):
        a = nc.as_tensor(a)
        return nc.add(nc.scale(nc.mean(nc.reshape(a, (a.shape[0], -1)), axis=1), 2.0), -1.0)

    real = (np.ones((3, 2, 2)), np.ones((3, 2, 2, 1)))
    fake = (Tensor(np.zeros((3, 2, 2))), Tensor(np.zeros((3, 2, 2, 1))))
    loss, w = critic_loss(d, real, fake)
    assert w == 2.0 and float(loss.data) == -2.0
    assert float(generator_loss(d, fake).data) == 1.0


def test_losses_match_hand_evaluation_on_batch_of_two():
    m = _model(max_atoms=3, disc=(1,), seed=3)
    rng = np.random.default_rng(1)
    z = sample_z(m.config, 2, rng)
    real = (np.stack([_real(m, "CO", 1)[0][0], _real(m, "CCN", 1)[0][0]]),
            np.stack([_real(m, "CO", 1)[1][0], _real(m, "CCN", 1)[1][0]]))
    out = wgan_losses(m, real, None, z, None)
    (layer,) = m.d1.mlp.layers
    w, b = layer.weight.data[:, 0], layer.bias.data[0]
    with nc.no_record():
        f = m.g1(*z)
    flat_fake = np.concatenate([f.annotation.data.reshape(2, -1), f.adjacency.data.reshape(2, -1)], 1)
    flat_real = np.concatenate([real[0].reshape(2, -1), real[1].reshape(2, -1)], 1)
    d_real = np.tanh(flat_real @ w + b)
    d_fake = np.tanh(flat_fake @ w + b)
    assert float(out.loss_d1.data) == pytest.approx(-(d_real.mean() - d_fake.mean()), abs=1e-12)
    assert float(out.loss_g1.data) == pytest.approx(-d_fake.mean(), abs=1e-12)
    assert out.w1 == pytest.approx(d_real.mean() - d_fake.mean(), abs=1e-12)


@pytest.mark.parametrize("variant", ["NoTarget", "CrossLoss"])
def test_single_stage_has_no_stage_two_terms(variant):
    m = _model(variant)
    real = _real(m, "CCO", 2)
    out = wgan_losses(m, real, real, sample_z(m.config, 2, np.random.default_rng(0)), None)
    assert float(out.loss_d2.data) == 0.0 and float(out.loss_g2.data) == 0.0 and out.w2 == 0.0
    assert m.g2 is None and m.d2 is None


def test_loss_errors():
    m = _model("Ligand")
    real = _real(m, "CCO", 2)
    z = sample_z(m.config, 2, np.random.default_rng(0))
    with pytest.raises(VariantMismatch):
        wgan_losses(m, real, real, z, None)
    with pytest.raises(EmptyBatch):
        wgan_losses(m, (real[0][:0], real[1][:0]), real, (z[0][:0], z[1][:0]), _cond(m, 2))
    with pytest.raises(nc.ShapeMismatch):
        wgan_losses(m, _real(m, "CCO", 3), real, z, _cond(m, 2))
    p = _model("Prot")
    with pytest.raises(VariantMismatch):
        wgan_losses(p, real, real, z, _cond(p, 2))


# ---------------------------------------------------------------------------
# gradient penalty


def _linear_critic(w):
    W = Tensor(w[:, None], requires_grad=True)
    return (lambda x: nc.reshape(nc.matmul(x, W), (-1,))), W


@pytest.mark.parametrize("norm,expected", [(1.0, 0.0), (3.0, 40.0), (0.0, 10.0)])
def test_gp_linear_critic(norm, expected):
    rng = np.random.default_rng(0)
    w = rng.normal(size=6)
    w = norm * w / np.linalg.norm(w)
    critic, W = _linear_critic(w)
    real, fake = rng.normal(size=(5, 6)), rng.normal(size=(5, 6))
    val, _ = gradient_penalty([critic], [W], [real], [fake], 10.0, rng)
    assert val == pytest.approx(expected, abs=1e-9)


def test_gp_zero_lambda_is_zero():
    rng = np.random.default_rng(0)
    critic, W = _linear_critic(np.full(4, 3.0))
    val, (g,) = gradient_penalty([critic], [W], [rng.normal(size=(3, 4))], [rng.normal(size=(3, 4))], 0.0, rng)
    assert val == 0.0 and not g.any()


def _mlp_critic(sizes, n_atoms, seed):
    mcfg = ModelConfig.tiny(depth=1, model_dim=8, heads=2, max_atoms=n_atoms, disc_sizes=sizes)
    return Discriminator(mcfg.discriminator, mcfg.encoder, np.random.default_rng(seed))


@pytest.mark.parametrize("seed", range(2))
def test_gp_parameter_gradient_nested_fd(seed):
    d = _mlp_critic((5, 3, 1), 2, seed)
    rng = np.random.default_rng(seed + 10)
    real, fake = rng.normal(size=(3, d.n_in)), rng.normal(size=(3, d.n_in))
    params = d.parameters()
    val, grads = gradient_penalty([d.score_flat], list(params.values()), [real], [fake], 10.0,
                                  np.random.default_rng(99))
    eps = np.random.default_rng(99).uniform(0.0, 1.0, size=3)[:, None]
    xhat = eps * real + (1 - eps) * fake
    weights = lambda: [(l.weight.data, l.bias.data) for l in d.mlp.layers]
    assert val == pytest.approx(10.0 * gp_value(xhat, weights()), rel=1e-12)
    for (name, p), g in zip(params.items(), grads):
        fd = np.zeros(p.shape)
        for i in np.ndindex(p.shape):
            old = p.data[i]
            p.data[i] = old + 1e-6
            up = gp_value(xhat, weights())
            p.data[i] = old - 1e-6
            dn = gp_value(xhat, weights())
            p.data[i] = old
            fd[i] = 10.0 * (up - dn) / 2e-6
        err = np.abs(fd - g).max() / max(np.abs(fd).max(), 1e-6)
        assert err < 1e-3, name


def test_joint_gp_uses_one_interpolation_per_sample():
    d1 = _mlp_critic((4, 1), 2, 0)
    d2 = _mlp_critic((3, 1), 2, 1)
    rng = np.random.default_rng(5)
    r1, f1 = rng.normal(size=(4, d1.n_in)), rng.normal(size=(4, d1.n_in))
    r2, f2 = rng.normal(size=(4, d2.n_in)), rng.normal(size=(4, d2.n_in))
    params = list(d1.parameters().values()) + list(d2.parameters().values())
    val, _ = gradient_penalty([d1.score_flat, d2.score_flat], params, [r1, r2], [f1, f2], 10.0,
                              np.random.default_rng(3))
    eps = np.random.default_rng(3).uniform(0.0, 1.0, size=4)[:, None]
    w1 = [(l.weight.data, l.bias.data) for l in d1.mlp.layers]
    w2 = [(l.weight.data, l.bias.data) for l in d2.mlp.layers]
    g1 = mlp_input_grad(eps * r1 + (1 - eps) * f1, w1)
    g2 = mlp_input_grad(eps * r2 + (1 - eps) * f2, w2)
    norm = np.sqrt((g1 ** 2).sum(1) + (g2 ** 2).sum(1))
    assert val == pytest.approx(10.0 * ((norm - 1) ** 2).mean(), rel=1e-12)


def test_gp_nonnegative_over_random_inputs():
    rng = np.random.default_rng(0)
    for seed in range(5):
        d = _mlp_critic((4, 1), 2, seed)
        val, _ = gradient_penalty([d.score_flat], list(d.parameters().values()),
                                  [rng.normal(size=(3, d.n_in)) * 5], [rng.normal(size=(3, d.n_in))], 10.0, rng)
        assert val >= 0.0


# ---------------------------------------------------------------------------
# scaffold penalty and the score-function term


def _mats(smiles, n=12):
    return to_matrices(parse_smiles(smiles), n)


def test_rl_identical_scaffold_is_one():
    assert rl_scaffold_penalty([_mats("c1ccccc1CCO")], [parse_smiles("Nc1ccccc1")]) == 1.0


def test_rl_disjoint_scaffold_is_zero():
    a = fingerprint(murcko_scaffold(parse_smiles("c1ccccc1")))
    b = fingerprint(murcko_scaffold(parse_smiles("C1CCOC1")))
    assert a.bits & b.bits == 0
    assert rl_scaffold_penalty([_mats("c1ccccc1CC")], [parse_smiles("OC1CCOC1")]) == 0.0


def test_rl_mixed_batch_brute_force():
    gen_smiles = ["c1ccccc1C", "C1CCNCC1CC", "CCCO", "C1CCC(CC1)c1ccncc1"]
    refs = [parse_smiles("c1ccccc1CN"), parse_smiles("O=C1CCNCC1")]
    invalid = MolMatrices.from_classes(np.r_[np.full(5, 1), np.full(7, 12)], np.zeros((12, 12), int))
    adj = invalid.bond_classes()
    for k in range(1, 5):
        adj[0, k] = adj[k, 0] = 1
    invalid = MolMatrices.from_classes(invalid.atom_classes(), adj)  # pentavalent nitrogen hub
    gen = [_mats(s) for s in gen_smiles] + [invalid]

    def bitset(g):
        return set(fingerprint(murcko_scaffold(g)).on_bits())

    ref_bits = [bitset(g) for g in refs]
    expected = []
    for s in gen_smiles:
        scaf = murcko_scaffold(parse_smiles(s))
        expected.append(0.0 if len(scaf) == 0 else max(bitset_tanimoto(bitset(scaf), r) for r in ref_bits))
    expected.append(1.0)
    assert rl_scaffold_penalty(gen, refs) == pytest.approx(np.mean(expected), abs=1e-12)
    assert rl_scaffold_penalty([], refs) == 0.0


def test_sample_log_prob_brute_force():
    rng = np.random.default_rng(0)
    ann = rng.dirichlet(np.ones(13), size=(2, 3))
    adj = rng.dirichlet(np.ones(5), size=(2, 3, 3))
    adj = (adj + adj.transpose(0, 2, 1, 3)) / 2
    atoms = rng.integers(0, 13, size=(2, 3))
    bonds = rng.integers(0, 5, size=(2, 3, 3))
    from targetgan.nets import SoftMol
    lp = sample_log_prob(SoftMol(Tensor(ann), Tensor(adj)), atoms, bonds).data
    for b in range(2):
        ref = sum(math.log(ann[b, i, atoms[b, i]] + 1e-12) for i in range(3))
        ref += sum(math.log(adj[b, i, j, bonds[b, i, j]] + 1e-12) for i in range(3) for j in range(i + 1, 3))
        assert lp[b] == pytest.approx(ref, abs=1e-12)


def test_reinforce_constant_reward_has_no_gradient():
    from targetgan.nets import SoftMol
    rng = np.random.default_rng(1)
    ann = Tensor(rng.dirichlet(np.ones(13), size=(3, 2)), requires_grad=True)
    adj = Tensor(rng.dirichlet(np.ones(5), size=(3, 2, 2)), requires_grad=True)
    atoms = rng.integers(0, 13, size=(3, 2))
    bonds = np.zeros((3, 2, 2), int)
    with Tape() as t:
        s = reinforce_surrogate(SoftMol(ann, adj), atoms, bonds, np.full(3, 0.5))
    g_ann, _ = nc.grad(t, s, [ann, adj])
    assert not g_ann.data.any()


def test_sample_z_shapes_and_modes():
    cfg = ModelConfig.tiny()
    z = sample_z(cfg, 3, np.random.default_rng(0))
    assert z[0].shape == (3, 12, 13) and np.array_equal(z[1], z[1].transpose(0, 2, 1, 3))
    with pytest.raises(ValueError):
        sample_z(ModelConfig.tiny(input_mode="perturbed"), 3, np.random.default_rng(0))
    real = _real(_model(max_atoms=12), "CCO", 3)
    zp = sample_z(ModelConfig.tiny(input_mode="perturbed", perturb_sigma=0.0), 3, np.random.default_rng(0), real)
    assert np.array_equal(zp[0], real[0])


# ---------------------------------------------------------------------------
# training loop


def _trainer(variant="NoTarget", **kw):
    cfg = tiny_train_config(variant=variant, **kw)
    return Trainer(cfg, toy_bundle(cfg))


def _snap(model, *names):
    return {k: v.data.copy() for k, v in model.params(*names).items()}


def _same(a, b):
    return a.keys() == b.keys() and all(np.array_equal(a[k], b[k]) for k in a)


@pytest.mark.parametrize("variant", ["NoTarget", "Prot"])
def test_freeze_routing(variant):
    t = _trainer(variant)
    stages = (1, 2) if t.cfg.variant.two_stage else (1,)
    idx = t.train_idx[:4]
    real1 = t._real1(idx)
    real2 = t._inhibitor_batch(4, t.rng["batch"]) if 2 in stages else None
    cond = t._condition(4, t.rng["batch"])
    from targetgan.training.loop import StepStats
    g_names, d_names = [f"g{s}" for s in stages], [f"d{s}" for s in stages]
    g0, d0 = _snap(t.model, *g_names), _snap(t.model, *d_names)
    t.critic_step(stages, real1, real2, t._z(4, real1), cond, True, StepStats())
    assert _same(g0, _snap(t.model, *g_names))
    assert not _same(d0, _snap(t.model, *d_names))
    d1 = _snap(t.model, *d_names)
    t.generator_step(stages, t._z(4, real1), cond, False, StepStats())
    assert _same(d1, _snap(t.model, *d_names))
    assert not _same(g0, _snap(t.model, *g_names))


def test_zero_lambda_critic_step_is_plain_wasserstein_update():
    t = _trainer(lambda_gp=0.0)
    twin = copy.deepcopy(t)
    idx = t.train_idx[:4]
    from targetgan.training.loop import StepStats
    stats = StepStats()
    real1 = t._real1(idx)
    t.critic_step((1,), real1, None, t._z(4, real1), None, True, stats)
    assert stats.gp == 0.0
    m = twin.model
    real1 = twin._real1(idx)
    z = twin._z(4, real1)
    with nc.no_record():
        f1 = m.g1(*z)
    params = m.params("d1")
    with Tape() as tape:
        loss, _ = critic_loss(m.d1, real1, (f1.annotation, f1.adjacency))
    grads = nc.grad(tape, loss, list(params.values()))
    nc.adam_step(params, {k: g.data for k, g in zip(params, grads)}, m.opt["d1"], twin.cfg.lr)
    assert stats.loss_d1 == float(loss.data)
    assert _same(_snap(t.model, "d1"), _snap(m, "d1"))


@pytest.mark.parametrize("variant", ["Prot", "Ligand"])
def test_warmup_for_all_epochs_leaves_stage_two_untouched(variant):
    t = _trainer(variant, route="WarmUp", warmup_epochs=2, epochs=2)
    s0 = _snap(t.model, "g2", "d2")
    g1 = _snap(t.model, "g1")
    t.run()
    assert _same(s0, _snap(t.model, "g2", "d2"))
    assert not _same(g1, _snap(t.model, "g1"))
    assert t.model.opt["g2"].step == 0 and t.model.opt["d2"].step == 0


def test_warmup_then_both_stages():
    t = _trainer("Ligand", route="WarmUp", warmup_epochs=1, epochs=2)
    s0 = _snap(t.model, "g2", "d2")
    t.run_epoch()
    assert _same(s0, _snap(t.model, "g2", "d2"))
    t.run_epoch()
    assert not _same(s0, _snap(t.model, "g2", "d2"))


def test_joint_route_updates_both_stages_from_step_zero():
    t = _trainer("Ligand", route="Joint")
    s0 = _snap(t.model, "g2", "d2")
    t.train_step(t.train_idx[:4])
    assert not _same(s0, _snap(t.model, "g2", "d2"))


def test_metric_log_bitwise_reproducible(tmp_path):
    cfg = tiny_train_config(epochs=2, validity_samples=16)
    bundle = toy_bundle(cfg, n=64)
    train(cfg, bundle, tmp_path / "a")
    train(cfg, bundle, tmp_path / "b")
    a = (tmp_path / "a" / "metrics.csv").read_bytes()
    assert a == (tmp_path / "b" / "metrics.csv").read_bytes()
    lines = a.decode().splitlines()
    assert lines[0] == ",".join(METRIC_HEADER)
    assert lines[0] == "epoch,step,loss_d1,loss_g1,loss_d2,loss_g2,gp,w1_est,w2_est,validity"
    assert len(lines) == 3
    for name in ("epoch_001.dgck", "epoch_002.dgck"):
        assert (tmp_path / "a" / "checkpoints" / name).read_bytes() == \
               (tmp_path / "b" / "checkpoints" / name).read_bytes()
    other = train(cfg.replace(seed=1), bundle, tmp_path / "c")
    assert (tmp_path / "c" / "metrics.csv").read_bytes() != a
    assert other.epoch == 2


def test_epoch_record_fields_are_finite():
    t = _trainer("Prot")
    rec = t.run_epoch()
    assert rec.step == len(t.train_idx) // 4
    values = [rec.loss_d1, rec.loss_g1, rec.loss_d2, rec.loss_g2, rec.gp, rec.w1_est, rec.w2_est]
    assert all(math.isfinite(v) for v in values)
    assert rec.gp >= 0.0 and 0.0 <= rec.validity <= 1.0


def test_non_finite_loss_writes_diagnostic(tmp_path):
    cfg = tiny_train_config()
    t = Trainer(cfg, toy_bundle(cfg), tmp_path)
    t.model.d1.mlp.layers[0].weight.data[0, 0] = np.nan
    with pytest.raises(NonFiniteLoss) as info:
        t.run_epoch()
    ck = load_checkpoint(info.value.checkpoint)
    assert ck.meta["diagnostic"]
    assert info.value.checkpoint.endswith("diagnostic.dgck")


# ---------------------------------------------------------------------------
# checkpoints and generation


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    out = tmp_path_factory.mktemp("ck")
    cfg = tiny_train_config(variant="Ligand", epochs=1)
    t = train(cfg, toy_bundle(cfg), out)
    return t, out / "checkpoints" / "epoch_001.dgck"


def test_checkpoint_round_trip(trained):
    t, path = trained
    ck = load_checkpoint(path)
    assert ck.variant is Variant.LIGAND
    assert ck.meta["split"]["test_indices"] == t.test_idx.tolist()
    assert ck.meta["inhibitor_smiles"] == list(t.bundle.inhibitors.smiles)
    model = ck.model()
    assert _same(_snap(model, "g1", "d1", "g2", "d2"), _snap(t.model, "g1", "d1", "g2", "d2"))
    for net, state in t.model.opt.items():
        back = model.opt[net]
        assert back.step == state.step
        assert _same(back.m, state.m) and _same(back.v, state.v)
    tensors = model_tensors(t.model)
    assert encode_checkpoint(ck.variant, ck.meta, tensors) == path.read_bytes()


@pytest.mark.parametrize("damage", ["flip", "truncate", "magic", "empty"])
def test_checkpoint_corruption(trained, damage):
    data = bytearray(trained[1].read_bytes())
    if damage == "flip":
        data[len(data) // 2] ^= 0xFF
    elif damage == "truncate":
        data = data[: len(data) - 10]
    elif damage == "magic":
        data[:4] = b"XXXX"
    else:
        data = bytearray()
    with pytest.raises(CheckpointCorrupt):
        decode_checkpoint(bytes(data))


def test_missing_checkpoint(tmp_path):
    with pytest.raises(CheckpointCorrupt):
        load_checkpoint(tmp_path / "none.dgck")


def test_generate_zero_and_determinism(trained):
    _, path = trained
    assert len(generate(path, 0)) == 0
    a = generate(path, 20, seed=5)
    b = generate(path, 20, seed=5)
    assert a.smiles == b.smiles and a.matrices == b.matrices
    assert len(a) == 20
    t = generate(path, 20, mode="temperature", tau=1.0, seed=5)
    assert len(t.smiles) == 20


def test_generate_perturbed_needs_seed_molecules(tmp_path):
    cfg = tiny_train_config(input_mode="perturbed")
    bundle = toy_bundle(cfg)
    train(cfg, bundle, tmp_path)
    path = tmp_path / "checkpoints" / "epoch_001.dgck"
    with pytest.raises(ValueError):
        generate(path, 4)
    assert len(generate(path, 4, seed_molecules=bundle.general)) == 4


@pytest.mark.parametrize("variant", [v.value for v in Variant])
@pytest.mark.parametrize("route", ["Joint", "WarmUp"])
def test_every_variant_trains_and_generates(tmp_path, variant, route):
    cfg = tiny_train_config(variant=variant, route=route, warmup_epochs=0)
    t = train(cfg, toy_bundle(cfg), tmp_path)
    ck = load_checkpoint(t.checkpoints[-1])
    assert ck.variant is Variant(variant)
    assert ModelConfig.from_dict(ck.meta["model_config"]) == cfg.model_config()
    out = generate(ck, 6, seed=1)
    assert len(out.smiles) == 6
    if Variant(variant).cond_kind == "pocket":
        p = ck.pocket()
        assert p == t.bundle.pocket
