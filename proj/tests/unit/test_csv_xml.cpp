#include <gtest/gtest.h>

#include <sstream>

#include "dwe/csv.hpp"
#include "dwe/xml.hpp"

namespace csv = dwe::csv;
namespace xml = dwe::xml;

TEST(Csv, ParsesQuotedFieldsAndSkipsComments) {
    const auto t = csv::parse("# config abc\na,b\n\"x,1\",\"say \"\"hi\"\"\"\r\n\r\n3,\n");
    ASSERT_EQ(t.header.size(), 2u);
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_EQ(t.rows[0][0], "x,1");
    EXPECT_EQ(t.rows[0][1], "say \"hi\"");
    EXPECT_EQ(t.rows[1][1], "");
    EXPECT_EQ(t.column("b"), 1u);
    EXPECT_THROW((void)t.column("c"), csv::CsvError);
}

TEST(Csv, RejectsRaggedRows) { EXPECT_THROW((void)csv::parse("a,b\n1\n"), csv::CsvError); }

TEST(Csv, WriteThenParseIsIdentity) {
    std::vector<std::vector<std::string>> rows = {{"h1", "h2"}, {"#lead", "a\nb"}, {"q\"", " sp "}};
    std::ostringstream os;
    for (const auto& r : rows) csv::write_row(os, r);
    const auto t = csv::parse(os.str());
    EXPECT_EQ(t.header, rows[0]);
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_EQ(t.rows[0], rows[1]);
    EXPECT_EQ(t.rows[1], rows[2]);
}

TEST(Xml, ParsesElementsAttributesEntities) {
    const auto root = xml::parse(
        "<?xml version=\"1.0\"?><!DOCTYPE a [<!ENTITY x \"y\">]><a k='v &amp; w'><!-- c --><b>1 &lt; 2</b>"
        "<b><![CDATA[<raw>]]></b>&#x41;&custom;</a>");
    EXPECT_EQ(root.name, "a");
    EXPECT_EQ(root.attribute("k"), "v & w");
    const auto bs = root.children_named("b");
    ASSERT_EQ(bs.size(), 2u);
    EXPECT_EQ(bs[0]->text_content(), "1 < 2");
    EXPECT_EQ(bs[1]->text_content(), "<raw>");
    EXPECT_EQ(root.text_content(), "1 < 2<raw>A&custom;");
}

TEST(Xml, ErrorsCarryByteOffsets) {
    try {
        (void)xml::parse("<a><b></a>", 100);
        FAIL() << "expected XmlError";
    } catch (const xml::XmlError& e) {
        EXPECT_GE(e.offset(), 100u);
    }
    EXPECT_THROW((void)xml::parse("<a x='1' x='2'/>"), xml::XmlError);
    EXPECT_THROW((void)xml::parse("<a>"), xml::XmlError);
    EXPECT_THROW((void)xml::parse("<a/><b/>"), xml::XmlError);
}

TEST(Xml, DeepNestingIsAnErrorNotACrash) {
    std::string deep;
    for (int i = 0; i < 5000; ++i) deep += "<a>";
    EXPECT_THROW((void)xml::parse(deep), xml::XmlError);
}
