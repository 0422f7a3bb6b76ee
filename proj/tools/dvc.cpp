#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dvc/baseline_cmds.hpp"
#include "dvc/bd_metrics.hpp"
#include "dvc/bitstream.hpp"
#include "dvc/kernels.hpp"
#include "dvc/metrics.hpp"
#include "dvc/model.hpp"
#include "dvc/pipeline.hpp"
#include "dvc/synthetic.hpp"
#include "dvc/training.hpp"
#include "dvc/video_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<dvc::TrainingClip> load_training_data(const std::string& path, int crop,
                                                  uint64_t seed) {
    std::vector<dvc::TrainingClip> clips;
    if (dvc::is_synth_uri(path)) {
        clips = dvc::synth_translating_clips(dvc::parse_synth_uri(path));
    } else if (fs::is_directory(path)) {
        // directory of clip directories (png), or a single png directory
        std::vector<std::string> subdirs;
        for (const auto& e : fs::directory_iterator(path))
            if (e.is_directory()) subdirs.push_back(e.path().string());
        std::sort(subdirs.begin(), subdirs.end());
        if (subdirs.empty()) subdirs.push_back(path);
        int id = 0;
        for (const auto& d : subdirs) {
            dvc::TrainingClip c;
            c.clip_id = id++;
            c.frames = dvc::load_sequence(d);
            clips.push_back(std::move(c));
        }
    } else {
        dvc::TrainingClip c;
        c.clip_id = 0;
        c.frames = dvc::load_sequence(path);
        clips.push_back(std::move(c));
    }
    dvc::Rng rng(seed ^ 0xC0FFEEull);
    for (auto& c : clips) {
        if (c.frames.size() < 2) throw std::runtime_error("training clips need >= 2 frames");
        if (crop > 0 && (c.frames[0].dim(1) > crop || c.frames[0].dim(2) > crop))
            c = dvc::random_crop_clip(c, crop, rng);
    }
    return clips;
}

json report_to_json(const dvc::BitrateReport& rep) {
    json frames = json::array();
    for (const auto& f : rep.frames) {
        frames.push_back({{"type", f.type == dvc::FrameType::Intra ? "I" : "P"},
                          {"est_motion_bits", f.est_motion_bits},
                          {"est_residual_bits", f.est_residual_bits},
                          {"actual_motion_bits", f.actual_motion_bits},
                          {"actual_residual_bits", f.actual_residual_bits},
                          {"psnr_recon", f.psnr_recon},
                          {"psnr_warped", f.psnr_warped},
                          {"psnr_predicted", f.psnr_predicted}});
    }
    return json{{"width", rep.width},
                {"height", rep.height},
                {"bpp_actual", rep.bpp_actual()},
                {"bpp_estimated", rep.bpp_estimated()},
                {"motion_fraction", rep.motion_fraction()},
                {"frames", frames}};
}

void dump_recons(const std::string& dir, const std::vector<dvc::Tensor>& frames) {
    fs::create_directories(dir);
    char name[32];
    for (size_t i = 0; i < frames.size(); ++i) {
        std::snprintf(name, sizeof(name), "recon_%06zu.f32", i);
        dvc::save_raw_tensor((fs::path(dir) / name).string(), frames[i]);
    }
}

int cmd_train(const std::string& data, const std::string& out_dir, std::vector<float> lambdas,
              dvc::TrainConfig tcfg, dvc::ModelConfig base, int crop) {
    const auto clips = load_training_data(data, crop, tcfg.seed);
    std::ofstream log(fs::path(out_dir).empty() ? "train.log"
                                                : (fs::create_directories(out_dir),
                                                   (fs::path(out_dir) / "train.log").string()));
    const auto paths = dvc::train_schedule(clips, lambdas, base, tcfg, out_dir, &log);
    for (const auto& p : paths) std::cout << p << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"learned video codec: training, coding and evaluation"};
    app.require_subcommand(1);
    try {
        if (const char* env = std::getenv("DVC_KERNELS")) dvc::kern::set_backend(env);
    } catch (const std::exception& e) {
        std::cerr << "warning: " << e.what() << "\n";
    }

    // ---- train ----
    auto* train = app.add_subcommand("train", "train models over a lambda sweep");
    train->set_config("--config");
    std::string tr_data, tr_out = "runs";
    std::vector<float> tr_lambdas = {256.0f, 512.0f, 1024.0f, 2048.0f};
    dvc::TrainConfig tcfg;
    dvc::ModelConfig base;
    int tr_crop = 256;
    train->add_option("--data", tr_data, "dataset path or synthetic:... uri")->required();
    train->add_option("--out", tr_out, "output directory");
    train->add_option("--lambdas", tr_lambdas, "lambda sweep");
    train->add_option("--steps", tcfg.steps);
    train->add_option("--batch", tcfg.batch);
    train->add_option("--crop", tr_crop, "training crop (0: use frames as-is)");
    train->add_option("--lr", tcfg.lr);
    train->add_option("--plateau-window", tcfg.plateau_window);
    train->add_option("--plateau-threshold", tcfg.plateau_threshold);
    train->add_option("--warmup-steps", tcfg.warmup_steps);
    train->add_option("--flow-pretrain", tcfg.flow_pretrain_steps);
    train->add_option("--density-lr-scale", tcfg.density_lr_scale);
    train->add_option("--seed", tcfg.seed);
    train->add_option("--init-seed", base.init_seed);
    train->add_option("--res-filters", base.residual.filters);
    train->add_option("--res-latent", base.residual.latent_channels);
    train->add_option("--mc-channels", base.mc.channels);
    train->add_option("--mc-blocks", base.mc.num_residual_blocks);
    train->add_option("--flow-levels", base.flow.levels);
    bool no_mc = false, no_mvc = false, no_joint = false, no_buffer = false, no_motion = false;
    train->add_flag("--no-mc", no_mc, "disable the motion compensation net");
    train->add_flag("--no-mvc", no_mvc, "code quarter-pel raw flow instead of the mv codec");
    train->add_flag("--no-joint-flow", no_joint, "freeze the flow net (no joint training)");
    train->add_flag("--no-buffer", no_buffer, "train P frames against clean references");
    train->add_flag("--no-motion", no_motion, "drop motion entirely (intra-style residuals)");

    // ---- encode ----
    auto* enc = app.add_subcommand("encode", "encode a sequence to a bitstream");
    enc->set_config("--config");
    std::string en_input, en_ck, en_out = "out.dvc", en_report, en_dump;
    int en_gop = 10;
    enc->add_option("--input", en_input, "yuv file or png directory")->required();
    enc->add_option("--checkpoint", en_ck)->required();
    enc->add_option("--gop", en_gop);
    enc->add_option("--out", en_out);
    enc->add_option("--report", en_report, "write per-frame bit report (json)");
    enc->add_option("--dump-recon", en_dump, "dump encoder-side reconstructions (raw f32)");

    // ---- decode ----
    auto* dec = app.add_subcommand("decode", "decode a bitstream");
    dec->set_config("--config");
    std::string de_stream, de_ck, de_out = "decoded", de_dump;
    bool de_yuv = false;
    dec->add_option("--stream", de_stream)->required();
    dec->add_option("--checkpoint", de_ck)->required();
    dec->add_option("--out", de_out, "output png directory (or .yuv with --yuv)");
    dec->add_flag("--yuv", de_yuv, "write raw yuv420 instead of png");
    dec->add_option("--dump-recon", de_dump, "dump reconstructions (raw f32)");

    // ---- eval ----
    auto* ev = app.add_subcommand("eval", "psnr / ms-ssim / bpp of a decoded sequence");
    ev->set_config("--config");
    std::string ev_orig, ev_dec, ev_stream, ev_curve, ev_label = "dvc";
    ev->add_option("--original", ev_orig)->required();
    ev->add_option("--decoded", ev_dec)->required();
    ev->add_option("--stream", ev_stream, "bitstream (for bpp)");
    ev->add_option("--append-curve", ev_curve, "append an rd point to a curve csv");
    ev->add_option("--label", ev_label);

    // ---- bd ----
    auto* bd = app.add_subcommand("bd", "Bjontegaard deltas between two curve csvs");
    bd->set_config("--config");
    std::string bd_anchor, bd_test, bd_metric = "psnr";
    bool bd_oracle = false;
    bd->add_option("--anchor", bd_anchor)->required();
    bd->add_option("--test", bd_test)->required();
    bd->add_option("--metric", bd_metric)->check(CLI::IsMember({"psnr", "msssim"}));
    bd->add_flag("--with-oracle", bd_oracle, "also print the piecewise-linear cross-check");

    // ---- analyze ----
    auto* an = app.add_subcommand("analyze", "bit breakdown and flow statistics of a stream");
    an->set_config("--config");
    std::string an_stream, an_ck, an_out = "analysis", an_manifest;
    an->add_option("--stream", an_stream);
    an->add_option("--checkpoint", an_ck);
    an->add_option("--out", an_out, "output directory for csv files");
    an->add_option("--manifest", an_manifest, "print tensor names/shapes of a checkpoint");

    // ---- baseline-cmds ----
    auto* bl = app.add_subcommand("baseline-cmds", "emit reference H.264/H.265 command lines");
    bl->set_config("--config");
    dvc::BaselineSpec spec;
    std::vector<int> bl_qs = {15, 19, 23, 27};
    bl->add_option("--width", spec.width)->required();
    bl->add_option("--height", spec.height)->required();
    bl->add_option("--fps", spec.fps);
    bl->add_option("--frames", spec.frames);
    bl->add_option("--gop", spec.gop);
    bl->add_option("--qualities", bl_qs);
    bl->add_option("--input", spec.input);
    bl->add_option("--output", spec.output);

    // ---- synth ----
    auto* sy = app.add_subcommand("synth", "generate a translating-texture test sequence");
    sy->set_config("--config");
    std::string sy_out = "synth_seq";
    dvc::SynthConfig scfg;
    scfg.frames = 30;
    bool sy_yuv = false;
    sy->add_option("--out", sy_out, "png directory (or .yuv with --yuv)");
    sy->add_option("--frames", scfg.frames);
    sy->add_option("--width", scfg.width);
    sy->add_option("--height", scfg.height);
    sy->add_option("--seed", scfg.seed);
    sy->add_option("--shift", scfg.max_shift);
    sy->add_option("--noise", scfg.noise);
    sy->add_flag("--yuv", sy_yuv);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) {
            base.ablation.use_mc_net = !no_mc;
            base.ablation.use_mv_codec = !no_mvc;
            base.ablation.joint_flow_training = !no_joint;
            base.ablation.use_buffer = !no_buffer;
            base.ablation.use_motion = !no_motion;
            return cmd_train(tr_data, tr_out, tr_lambdas, tcfg, base, tr_crop);
        }
        if (*enc) {
            const auto frames = dvc::load_sequence(en_input);
            const auto model = dvc::CodecModel::load(en_ck);
            const auto result = dvc::encode_video(frames, *model, en_gop);
            dvc::write_file(en_out, result.bitstream);
            const double p = dvc::sequence_psnr(result.reconstructions, frames);
            std::cout << "frames " << frames.size() << " bpp " << result.report.bpp_actual()
                      << " psnr " << p << " motion_fraction " << result.report.motion_fraction()
                      << "\n";
            if (!en_report.empty()) {
                std::ofstream f(en_report);
                f << report_to_json(result.report).dump(2) << "\n";
            }
            if (!en_dump.empty()) dump_recons(en_dump, result.reconstructions);
            return 0;
        }
        if (*dec) {
            const auto bytes = dvc::read_file(de_stream);
            const auto model = dvc::CodecModel::load(de_ck);
            const auto frames = dvc::decode_video(bytes, *model);
            if (de_yuv)
                dvc::save_yuv420(de_out, frames);
            else
                dvc::save_sequence_png(de_out, frames);
            if (!de_dump.empty()) dump_recons(de_dump, frames);
            std::cout << "decoded " << frames.size() << " frames to " << de_out << "\n";
            return 0;
        }
        if (*ev) {
            const auto orig = dvc::load_sequence(ev_orig);
            const auto deco = dvc::load_sequence(ev_dec);
            if (orig.size() != deco.size())
                throw std::runtime_error("eval: frame count mismatch");
            const double p = dvc::sequence_psnr(deco, orig);
            const double m = dvc::sequence_ms_ssim(deco, orig);
            double bits_per_px = 0.0;
            if (!ev_stream.empty()) {
                const auto bytes = dvc::read_file(ev_stream);
                bits_per_px = dvc::bpp(bytes.size() * 8ull, orig[0].dim(2), orig[0].dim(1)) /
                              static_cast<double>(orig.size());
            }
            std::cout << "psnr " << p << " msssim " << m << " msssim_db " << dvc::msssim_to_db(m);
            if (!ev_stream.empty()) std::cout << " bpp " << bits_per_px;
            std::cout << "\n";
            if (!ev_curve.empty()) {
                const bool fresh = !fs::exists(ev_curve);
                std::ofstream f(ev_curve, std::ios::app);
                if (fresh) f << "label,bpp,psnr_db,msssim\n";
                f.precision(10);
                f << ev_label << ',' << bits_per_px << ',' << p << ',' << m << "\n";
            }
            return 0;
        }
        if (*bd) {
            const auto anchor = dvc::read_curve_csv(bd_anchor);
            const auto test = dvc::read_curve_csv(bd_test);
            const auto metric = bd_metric == "psnr" ? dvc::BdMetric::Psnr : dvc::BdMetric::MsssimDb;
            std::cout << "bd_rate_percent " << dvc::bd_rate(anchor, test, metric)
                      << " bd_quality_db " << dvc::bd_quality(anchor, test, metric) << "\n";
            if (bd_oracle)
                std::cout << "oracle_bd_rate_percent " << dvc::bd_rate_pl(anchor, test, metric)
                          << " oracle_bd_quality_db " << dvc::bd_quality_pl(anchor, test, metric)
                          << "\n";
            return 0;
        }
        if (*an) {
            if (!an_manifest.empty()) {
                auto model = dvc::CodecModel::load(an_manifest);
                for (auto& [name, p] : model->params()) {
                    std::cout << name << " [";
                    for (int i = 0; i < p->value.ndim(); ++i)
                        std::cout << (i ? "," : "") << p->value.dim(i);
                    std::cout << "]\n";
                }
                if (an_stream.empty()) return 0;
            }
            if (an_stream.empty() || an_ck.empty())
                throw std::runtime_error("analyze: --stream and --checkpoint required");
            const auto bytes = dvc::read_file(an_stream);
            const auto model = dvc::CodecModel::load(an_ck);
            const auto detail = dvc::decode_video_detailed(bytes, *model, true);
            fs::create_directories(an_out);
            {
                std::ofstream f(fs::path(an_out) / "bits.csv");
                f << "frame,type,est_motion_bits,est_residual_bits,actual_motion_bits,actual_"
                     "residual_bits\n";
                for (size_t i = 0; i < detail.frame_bits.size(); ++i) {
                    const auto& fb = detail.frame_bits[i];
                    f << i << ',' << (fb.type == dvc::FrameType::Intra ? 'I' : 'P') << ','
                      << fb.est_motion_bits << ',' << fb.est_residual_bits << ','
                      << fb.actual_motion_bits << ',' << fb.actual_residual_bits << "\n";
                }
            }
            const auto stats = dvc::analyze_flows(detail.flows);
            {
                std::ofstream f(fs::path(an_out) / "flow_hist.csv");
                f << "bin_low_px,count\n";
                for (size_t i = 0; i < stats.histogram.size(); ++i)
                    f << 0.25 * static_cast<double>(i) << ',' << stats.histogram[i] << "\n";
            }
            int64_t am = 0, ar = 0;
            double em = 0, er = 0;
            for (const auto& fb : detail.frame_bits) {
                am += fb.actual_motion_bits;
                ar += fb.actual_residual_bits;
                em += fb.est_motion_bits;
                er += fb.est_residual_bits;
            }
            const double tot = static_cast<double>(am + ar);
            std::cout << "actual_bits " << am + ar << " estimated_bits " << em + er
                      << " motion_fraction " << (tot > 0 ? am / tot : 0.0) << " flow_zero_fraction "
                      << stats.zero_fraction << "\n";
            return 0;
        }
        if (*bl) {
            std::cout << dvc::emit_baseline_commands(spec, bl_qs);
            return 0;
        }
        if (*sy) {
            const auto frames = dvc::synth_sequence(scfg);
            if (sy_yuv)
                dvc::save_yuv420(sy_out, frames);
            else
                dvc::save_sequence_png(sy_out, frames);
            std::cout << "wrote " << frames.size() << " frames to " << sy_out << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
