#include <gtest/gtest.h>

#include "avm/config.hpp"
#include "avm/image.hpp"
#include "avm/protocol.hpp"
#include "avm/server.hpp"
#include "ws_client.hpp"

using namespace avm;
using namespace avm::protocol;
using nlohmann::json;

namespace {

scene::MotionProfile still_profile(double seconds) {
  scene::MotionProfile p;
  p.duration_s = seconds;
  p.boom = scene::Timeline::constant(20);
  p.arm = scene::Timeline::constant(-90);
  return p;
}

service::Pipeline& shared_pipeline() {
  static service::Pipeline pipe(reference_rig(), scene::checkerboard_scene(), still_profile(1));
  return pipe;
}

}  // namespace

TEST(Envelope, RoundTrip) {
  for (auto t : {MessageType::Frame, MessageType::State, MessageType::Command, MessageType::Ack,
                 MessageType::Error}) {
    Envelope e{t, 42, 1234, {{"k", 1}}};
    const auto back = parse(serialize(e));
    EXPECT_EQ(back.type, t);
    EXPECT_EQ(back.seq, 42u);
    EXPECT_EQ(back.timestamp_ms, 1234);
    EXPECT_EQ(back.payload, e.payload);
    EXPECT_EQ(back.v, 1);
    EXPECT_EQ(message_type_from_string(to_string(t)), t);
  }
}

TEST(Envelope, IgnoresUnknownFieldsAndDefaultsVersion) {
  const auto e = parse(R"({"type":"command","seq":3,"payload":{"name":"snapshot"},"extra":[1,2]})");
  EXPECT_EQ(e.type, MessageType::Command);
  EXPECT_EQ(e.v, 1);
}

TEST(Envelope, RejectsMalformed) {
  EXPECT_THROW(parse("not json"), ProtocolError);
  EXPECT_THROW(parse(R"({"seq":1})"), ProtocolError);
  EXPECT_THROW(parse(R"({"type":"shout","seq":1})"), ProtocolError);
  EXPECT_THROW(parse(R"({"type":"command","seq":"x"})"), ProtocolError);
  EXPECT_THROW(parse(R"({"type":"command","seq":1,"v":2})"), ProtocolError);
  EXPECT_THROW(parse(R"({"type":"command","seq":1,"payload":[1]})"), ProtocolError);
}

TEST(Base64, RoundTripAndKnownVectors) {
  const std::string s = "foobar";
  const std::vector<std::uint8_t> bytes(s.begin(), s.end());
  EXPECT_EQ(base64_encode(std::span(bytes).first(0)), "");
  EXPECT_EQ(base64_encode(std::span(bytes).first(1)), "Zg==");
  EXPECT_EQ(base64_encode(std::span(bytes).first(2)), "Zm8=");
  EXPECT_EQ(base64_encode(bytes), "Zm9vYmFy");
  std::vector<std::uint8_t> all(256);
  for (int i = 0; i < 256; ++i) all[i] = static_cast<std::uint8_t>(i);
  for (std::size_t n : {0u, 1u, 2u, 3u, 255u, 256u}) {
    const auto part = std::span(all).first(n);
    EXPECT_EQ(base64_decode(base64_encode(part)), std::vector<std::uint8_t>(part.begin(), part.end()));
  }
  EXPECT_THROW(base64_decode("Zm9v!mFy"), ProtocolError);
  EXPECT_THROW(base64_decode("Zm9"), ProtocolError);
}

TEST(SessionReplies, AckErrorAndSnapshot) {
  auto& pipe = shared_pipeline();
  Session session(pipe);
  auto cmd = [](std::uint64_t seq, const char* name, json args) {
    return serialize({MessageType::Command, seq, 0, {{"name", name}, {"args", std::move(args)}}});
  };

  auto r = session.handle_text(cmd(1, "toggle_overlay", {{"enabled", true}}));
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].type, MessageType::Ack);
  EXPECT_EQ(r[0].payload["ack_seq"], 1);
  EXPECT_EQ(r[0].payload["state"]["overlay"], true);

  r = session.handle_text(cmd(2, "set_joints", {{"theta_bm_deg", 500}}));
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].type, MessageType::Error);
  EXPECT_EQ(r[0].payload["code"], kErrValidation);
  EXPECT_EQ(r[0].payload["ack_seq"], 2);

  r = session.handle_text(cmd(3, "dance", json::object()));
  EXPECT_EQ(r[0].payload["code"], kErrUnknownCommand);

  r = session.handle_text("{");
  EXPECT_EQ(r[0].payload["code"], kErrProtocol);
  EXPECT_TRUE(r[0].payload["ack_seq"].is_null());

  r = session.handle_text(serialize({MessageType::Ack, 4, 0, {}}));
  EXPECT_EQ(r[0].payload["code"], kErrProtocol);

  r = session.handle_text(cmd(5, "snapshot", json::object()));
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[1].type, MessageType::Frame);
  const auto& f = r[1].payload;
  EXPECT_EQ(f["encoding"], "png");
  const auto img = decode_png(base64_decode(f["data"].get<std::string>()));
  EXPECT_EQ(img.width(), f["width"]);
  EXPECT_EQ(img.height(), f["height"]);

  const auto s = session.state_message();
  EXPECT_EQ(s.type, MessageType::State);
  EXPECT_TRUE(s.payload.contains("state"));
  EXPECT_TRUE(s.payload.contains("stats"));
}

TEST(SessionReplies, SequenceNumbersIncrease) {
  Session session(shared_pipeline());
  const auto a = session.state_message();
  const auto b = session.state_message();
  EXPECT_LT(a.seq, b.seq);
}

TEST(Server, WebSocketCommandsAndFrames) {
  service::PipelineOptions o;
  o.loop_profile = true;
  service::Pipeline pipe(reference_rig(), scene::checkerboard_scene(), still_profile(1), o);
  server::Server srv(pipe);
  srv.start();
  ASSERT_NE(srv.port(), 0);
  pipe.start();
  {
    testclient::WsClient client(srv.port());
    const auto hello = client.read();
    EXPECT_EQ(hello["type"], "state");
    EXPECT_EQ(hello["v"], 1);

    auto seq = client.command("select_view", {{"view", "camera-1"}});
    auto reply = client.reply_to(seq);
    ASSERT_TRUE(reply);
    EXPECT_EQ((*reply)["type"], "ack");
    EXPECT_EQ((*reply)["payload"]["state"]["view"], "camera-1");

    const auto frame = client.read_until([](const json& m) {
      return m["type"] == "frame" && m["payload"]["view"] == "camera-1";
    });
    ASSERT_TRUE(frame);
    EXPECT_EQ((*frame)["payload"]["width"], 1600);

    seq = client.command("set_attitude", {{"roll_deg", 90}});
    reply = client.reply_to(seq);
    ASSERT_TRUE(reply);
    EXPECT_EQ((*reply)["type"], "error");
    EXPECT_EQ((*reply)["payload"]["code"], "validation");

    seq = client.command("warp");
    reply = client.reply_to(seq);
    ASSERT_TRUE(reply);
    EXPECT_EQ((*reply)["payload"]["code"], "unknown_command");

    EXPECT_TRUE(client.read_until([](const json& m) { return m["type"] == "state"; }));

    const auto [status, body] = testclient::http_request(srv.port(), boost::beast::http::verb::get, "/");
    EXPECT_EQ(status, 200);
    EXPECT_EQ(json::parse(body)["service"], "avm");
    EXPECT_EQ(testclient::http_request(srv.port(), boost::beast::http::verb::post, "/").first, 405);
  }
  srv.stop();
  pipe.stop();
}
