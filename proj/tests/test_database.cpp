#include <string>
#include <vector>

#include "doctest.h"
#include "onebm/database.hpp"
#include "onebm/errors.hpp"
#include "onebm/ingest.hpp"

using namespace onebm;

namespace {

const std::string kToyDir = std::string(TEST_DATA_DIR) + "/toy";
const std::string kToySchema = kToyDir + "/schema.json";

ColumnData number_column(const std::vector<double>& values) {
  ColumnData col;
  col.type = ColumnType::numerical;
  col.numbers = values;
  col.nulls.assign(values.size(), false);
  return col;
}

LoadedTable make_table(TableSpec spec, std::vector<ColumnData> columns) {
  LoadedTable t;
  t.row_count = columns.empty() ? 0 : columns[0].size();
  t.spec = std::move(spec);
  t.columns = std::move(columns);
  return t;
}

// A -> B -> C where "a" is the primary key of all three tables and the
// schema also declares the direct relation A.a = C.a.
Database chain_database() {
  DatabaseSchema schema;
  schema.main_table = "A";
  schema.tables = {
      TableSpec{"A", "A.csv", "a",
                {{"a", ColumnType::numerical, {}}, {"x", ColumnType::numerical, {}}}},
      TableSpec{"B", "B.csv", "a", {{"a", ColumnType::numerical, {}}}},
      TableSpec{"C", "C.csv", "a",
                {{"a", ColumnType::numerical, {}}, {"c", ColumnType::numerical, {}}}},
  };
  schema.relations = {
      {"A", "a", "B", "a", "a"},
      {"B", "a", "C", "a", "a"},
      {"A", "a", "C", "a", "a"},
  };
  std::vector<LoadedTable> tables;
  tables.push_back(make_table(schema.tables[0],
                              {number_column({1, 2, 3}), number_column({10, 20, 30})}));
  tables.push_back(make_table(schema.tables[1], {number_column({1, 2, 3})}));
  tables.push_back(make_table(schema.tables[2],
                              {number_column({1, 2, 3}), number_column({5, 6, 7})}));
  return validate_schema(std::move(schema), std::move(tables), StringPool{});
}

}  // namespace

TEST_CASE("edge classification by primary-key status at both ends") {
  Database toy = load_database(kToySchema, kToyDir);
  // message.TrainID = delay.TrainID: key of neither side.
  CHECK(classify_edge(toy, toy.schema.relations[0], true) == EdgeKind::many_to_many);
  CHECK(classify_edge(toy, toy.schema.relations[0], false) == EdgeKind::many_to_many);
  // message.TrainID = info.TrainID: key of info only.
  CHECK(classify_edge(toy, toy.schema.relations[1], true) == EdgeKind::many_to_one);
  CHECK(classify_edge(toy, toy.schema.relations[1], false) == EdgeKind::one_to_many);

  Database chain = chain_database();
  CHECK(classify_edge(chain, chain.schema.relations[0], true) == EdgeKind::one_to_one);

  // Anti-symmetry: one_to_many one way iff many_to_one the other.
  for (const Database* db : {&toy, &chain})
    for (const Relation& rel : db->schema.relations) {
      EdgeKind fwd = classify_edge(*db, rel, true);
      EdgeKind bwd = classify_edge(*db, rel, false);
      CHECK((fwd == EdgeKind::one_to_many) == (bwd == EdgeKind::many_to_one));
      CHECK((fwd == EdgeKind::one_to_one) == (bwd == EdgeKind::one_to_one));
      CHECK((fwd == EdgeKind::many_to_many) == (bwd == EdgeKind::many_to_many));
    }
}

TEST_CASE("path kind is multiple iff a hop increases multiplicity") {
  Database toy = load_database(kToySchema, kToyDir);
  const LoadedTable& info = toy.table(2);
  const LoadedTable& delay = toy.table(1);

  JoiningPath to_info{{PathHop{1, true}}, info.column_index("TrainType")};
  CHECK(classify_path(toy, to_info) == PathKind::one_to_one);

  JoiningPath to_delay{{PathHop{0, true}}, delay.column_index("Delay")};
  CHECK(classify_path(toy, to_delay) == PathKind::multiple);

  // one_to_one hops never flip an already-multiple path back.
  JoiningPath two_hops{{PathHop{0, true}, PathHop{3, true}}, 1};
  CHECK(classify_path(toy, two_hops) == PathKind::multiple);
}

TEST_CASE("key indexes cover relation endpoints") {
  Database toy = load_database(kToySchema, kToyDir);
  const KeyIndex& delay_train = toy.key_index(1, 0);  // delay.TrainID
  auto it = delay_train.find(encode_key(CellValue::from_number(101)));
  REQUIRE(it != delay_train.end());
  CHECK(it->second == std::vector<uint32_t>{0, 1, 2, 3, 4});
  // Non-endpoint columns have no index.
  CHECK_THROWS_AS(toy.key_index(1, 2), OnebmError);
}

TEST_CASE("hop accessors resolve direction") {
  Database toy = load_database(kToySchema, kToyDir);
  PathHop forward{0, true};
  CHECK(toy.hop_source_table(forward) == 0);
  CHECK(toy.hop_dest_table(forward) == 1);
  PathHop backward{0, false};
  CHECK(toy.hop_source_table(backward) == 1);
  CHECK(toy.hop_dest_table(backward) == 0);

  JoiningPath path{{PathHop{0, true}, PathHop{3, true}}, 1};
  CHECK(toy.path_tables(path) == std::vector<int>{0, 1, 3});
  CHECK(toy.terminal_table(path) == 3);
}

TEST_CASE("redundant key-preserving hops canonicalize away") {
  Database db = chain_database();
  JoiningPath redundant{{PathHop{0, true}, PathHop{1, true}}, 1};  // A->B->C collect c
  JoiningPath direct{{PathHop{2, true}}, 1};                       // A->C collect c
  CHECK(canonicalize_path(db, redundant) == direct);
  CHECK(canonicalize_path(db, direct) == direct);

  // Idempotence.
  CHECK(canonicalize_path(db, canonicalize_path(db, redundant)) ==
        canonicalize_path(db, redundant));
}

TEST_CASE("canonicalization requires the key-preserving conditions") {
  Database toy = load_database(kToySchema, kToyDir);
  // message -> delay -> event enters delay on TrainID and leaves on
  // StationID: different columns, no rewrite.
  JoiningPath path{{PathHop{0, true}, PathHop{3, true}}, 1};
  CHECK(canonicalize_path(toy, path) == path);

  // message -> event -> delay enters and leaves event on StationID, but
  // StationID is not event's primary key: no rewrite.
  JoiningPath back{{PathHop{2, true}, PathHop{3, false}}, 2};
  CHECK(canonicalize_path(toy, back) == back);
}

TEST_CASE("path rendering is stable") {
  Database toy = load_database(kToySchema, kToyDir);
  const LoadedTable& delay = toy.table(1);
  const LoadedTable& info = toy.table(2);
  const LoadedTable& event = toy.table(3);

  JoiningPath to_delay{{PathHop{0, true}}, delay.column_index("Delay")};
  CHECK(describe_path(toy, to_delay) == "message-[TrainID]->delay :: Delay :: multiple");

  JoiningPath to_info{{PathHop{1, true}}, info.column_index("TrainType")};
  CHECK(describe_path(toy, to_info) == "message-[TrainID]->info :: TrainType :: one_to_one");

  JoiningPath two{{PathHop{0, true}, PathHop{3, true}}, event.column_index("EventType")};
  CHECK(describe_path(toy, two) ==
        "message-[TrainID]->delay-[StationID]->event :: EventType :: multiple");
}
