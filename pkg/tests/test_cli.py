import json

from toscaflow.cli import main
from toscaflow.csar import unpack_csar
from toscaflow.parsing import parse_service_template
from toscaflow.verifier import verify


def test_verify_duplicate_connection_reports_r3_and_exits_1(fixture_path, capsys):
    code = main(["verify", fixture_path("duplicate_connection.yaml")])
    out = capsys.readouterr().out
    assert code == 1
    assert "R3-DUPLICATE-CONN" in out


def test_verify_fix_out_then_reverify_clean(fixture_path, tmp_path, capsys):
    out_path = tmp_path / "ok.yaml"
    code = main(["verify", fixture_path("duplicate_connection.yaml"), "--fix",
                 "--out", str(out_path), "--seed", "7"])
    assert code == 0  # everything found was repaired
    assert out_path.exists()
    code = main(["verify", str(out_path)])
    assert code == 0
    assert capsys.readouterr() is not None


def test_verify_json_report(fixture_path, capsys):
    code = main(["verify", fixture_path("duplicate_connection.yaml"), "--report", "json"])
    assert code == 1
    report = json.loads(capsys.readouterr().out)
    assert report["fixed"] is False
    assert [d["rule"] for d in report["diagnostics"]] == ["R3-DUPLICATE-CONN"]
    assert report["diagnostics"][0]["fix"] is None


def test_verify_missing_file_exits_2(capsys):
    assert main(["verify", "missing.yaml"]) == 2


def test_verify_seed_reproducible(fixture_path, tmp_path):
    paths = []
    for run in range(2):
        out_path = tmp_path / f"fixed{run}.yaml"
        assert main(["verify", fixture_path("encrypt_mismatch.yaml"), "--fix",
                     "--out", str(out_path), "--seed", "41"]) == 0
        paths.append(out_path.read_bytes())
    assert paths[0] == paths[1]


def test_plan_json_first_start_is_a_platform(fixture_path, capsys):
    code = main(["plan", fixture_path("s3_to_gcs.yaml"), "--format", "json"])
    assert code == 0
    steps = json.loads(capsys.readouterr().out)
    first_start = next(s for s in steps if s["op"] == "start")
    assert first_start["node"] in ("AWSPlatform", "OpenStackPlatform")


def test_plan_image_pipeline_full_step_count(fixture_path, capsys):
    code = main(["plan", fixture_path("image_pipeline.yaml"), "--format", "json"])
    assert code == 0
    steps = json.loads(capsys.readouterr().out)
    assert len(steps) == 16 * 3  # six pipeline blocks plus ten host templates
    annotations = {s["node"]: s["annotation"] for s in steps
                   if s["op"] == "configure" and s["annotation"]}
    assert annotations == {
        "ConsMinIO_0": "remote:InvokeLambda_0",
        "InvokeLambda_1": "remote:InvokeImageFaaSFunction_0,PubGCS_0",
    }


def test_plan_cyclic_names_cycle_members(fixture_path, capsys):
    code = main(["plan", fixture_path("cyclic.yaml")])
    out = capsys.readouterr().out
    assert code == 1
    assert "Exec_A" in out and "Exec_B" in out


def test_plan_refuses_unverified_template(fixture_path, capsys):
    code = main(["plan", fixture_path("duplicate_connection.yaml")])
    assert code == 1
    assert "R3-DUPLICATE-CONN" in capsys.readouterr().out


def test_simulate_image_pipeline_writes_metrics(fixture_path, tmp_path, capsys):
    schedule = tmp_path / "inject.txt"
    schedule.write_text(
        "\n".join(f"{i} minio firstbucket img{i} 0a0b{i:02d}" for i in range(5))
        + "\n")
    metrics_path = tmp_path / "metrics.json"
    code = main(["simulate", fixture_path("image_pipeline.yaml"),
                 "--inject", str(schedule), "--until", "50",
                 "--metrics", str(metrics_path)])
    assert code == 0
    metrics = json.loads(metrics_path.read_text())
    assert metrics["stores"]["gcs/radongcs"] == 5
    assert metrics["stores"]["azure/blurredcontainer"] == 5
    assert metrics["final_tick"] == 50


def test_simulate_empty_schedule_all_zero(fixture_path, capsys):
    code = main(["simulate", fixture_path("image_pipeline.yaml"), "--until", "10"])
    assert code == 0
    metrics = json.loads(capsys.readouterr().out)
    assert all(counts == {"consumed": 0, "emitted": 0, "errors": 0}
               for counts in metrics["per_block"].values())
    assert metrics["stores"] == {}


def test_simulate_malformed_schedule_exits_2(fixture_path, tmp_path, capsys):
    schedule = tmp_path / "inject.txt"
    schedule.write_text("bogus line\n")
    assert main(["simulate", fixture_path("image_pipeline.yaml"),
                 "--inject", str(schedule)]) == 2


def test_simulate_unregistered_function_exits_1(tmp_path, capsys):
    template_text = """\
tosca_definitions_version: tosca_simple_yaml_1_3
topology_template:
  node_templates:
    VM_0:
      type: tosca.nodes.Compute
    Nifi_0:
      type: radon.nodes.nifi.Nifi
      properties: {component_version: "1.14.0"}
      requirements:
        - host: VM_0
    Src:
      type: radon.nodes.datapipeline.source.ConsMinIO
      properties: {name: s, BucketName: in, cred_file_path: c, MinIO_Endpoint: e}
      requirements:
        - host: Nifi_0
        - connectToPipeline: Fn
    Fn:
      type: radon.nodes.datapipeline.process.InvokeLambda
      properties: {name: f, cred_file_path: c, function_name: nobody-registered-this, region: r}
      requirements:
        - host: Nifi_0
        - ConnectToPipeline: Dst
    Dst:
      type: radon.nodes.datapipeline.destination.PubsMinIO
      properties: {name: d, BucketName: out, cred_file_path: c, MinIO_Endpoint: e}
      requirements:
        - host: Nifi_0
"""
    template_path = tmp_path / "t.yaml"
    template_path.write_text(template_text)
    schedule = tmp_path / "inject.txt"
    schedule.write_text("0 minio in k 00\n")
    code = main(["simulate", str(template_path), "--inject", str(schedule),
                 "--until", "5"])
    out = capsys.readouterr().out
    assert code == 1
    assert json.loads(out)["per_block"]["Fn"]["errors"] == 1


def test_csar_pack_unpack_round_trip(fixture_path, tmp_path, capsys):
    source = tmp_path / "bundle"
    (source / "playbooks").mkdir(parents=True)
    service = (open(fixture_path("s3_to_gcs.yaml"), "rb").read())
    (source / "service.yaml").write_bytes(service)
    (source / "playbooks" / "create.yml").write_bytes(b"- hosts: all\n")

    archive = tmp_path / "bundle.csar"
    assert main(["csar", "pack", str(source), str(archive)]) == 0

    dest = tmp_path / "out"
    assert main(["csar", "unpack", str(archive), str(dest)]) == 0
    assert (dest / "service.yaml").read_bytes() == service
    assert (dest / "playbooks" / "create.yml").read_bytes() == b"- hosts: all\n"


def test_csar_unpack_non_zip_exits_2(tmp_path, capsys):
    bogus = tmp_path / "bogus.csar"
    bogus.write_bytes(b"not a zip")
    assert main(["csar", "unpack", str(bogus), str(tmp_path / "out")]) == 2


def test_verify_entry_inside_archive_matches_direct(fixture_path, tmp_path):
    source = tmp_path / "bundle"
    source.mkdir()
    raw = open(fixture_path("duplicate_connection.yaml"), "rb").read()
    (source / "service.yaml").write_bytes(raw)
    archive_path = tmp_path / "bundle.csar"
    assert main(["csar", "pack", str(source), str(archive_path)]) == 0

    archive = unpack_csar(archive_path.read_bytes())
    inside = parse_service_template(archive.entry_bytes.decode("utf-8"))
    direct = parse_service_template(raw.decode("utf-8"))
    _, inside_diags = verify(inside)
    _, direct_diags = verify(direct)
    assert [(d.rule, d.nodes) for d in inside_diags] == \
        [(d.rule, d.nodes) for d in direct_diags]
