#include "doctest.h"
#include "onebm/cell.hpp"
#include "onebm/errors.hpp"

using namespace onebm;

TEST_CASE("column type names round-trip") {
  for (ColumnType t : {ColumnType::numerical, ColumnType::categorical, ColumnType::text,
                       ColumnType::timestamp})
    CHECK(column_type_from_string(to_string(t)) == t);
  CHECK_THROWS_AS(column_type_from_string("float"), OnebmError);
}

TEST_CASE("cell equality by kind and payload") {
  CHECK(CellValue::null_value() == CellValue::null_value());
  CHECK(CellValue::from_number(1.5) == CellValue::from_number(1.5));
  CHECK_FALSE(CellValue::from_number(1.5) == CellValue::from_number(2.5));
  CHECK_FALSE(CellValue::from_number(0.0) == CellValue::null_value());
  CHECK(CellValue::from_category(3) == CellValue::from_category(3));
  CHECK_FALSE(CellValue::from_category(3) == CellValue::from_text(3));  // kinds differ
  CHECK(CellValue::from_timestamp(42) == CellValue::from_timestamp(42));
  CHECK(CellValue::null_value().is_null());
  CHECK_FALSE(CellValue::from_number(0.0).is_null());
}

TEST_CASE("string pool interns and never moves ids") {
  StringPool pool;
  int32_t a = pool.intern("roadwork");
  int32_t b = pool.intern("strike");
  int32_t a2 = pool.intern("roadwork");
  CHECK(a == a2);
  CHECK(a != b);
  CHECK(pool.view(a) == "roadwork");
  CHECK(pool.view(b) == "strike");
  CHECK(pool.size() == 2);
}

TEST_CASE("join-key encoding folds negative zero and separates values") {
  CHECK(encode_key(CellValue::from_number(-0.0)) == encode_key(CellValue::from_number(0.0)));
  CHECK(encode_key(CellValue::from_number(1.0)) != encode_key(CellValue::from_number(2.0)));
  CHECK(encode_key(CellValue::from_category(7)) == encode_key(CellValue::from_category(7)));
  CHECK(encode_key(CellValue::from_category(7)) != encode_key(CellValue::from_category(8)));
  CHECK(encode_key(CellValue::from_timestamp(100)) != encode_key(CellValue::from_timestamp(101)));
}
