#include <string_view>
#include <utility>

#include "dwe/harvest.hpp"

namespace dwe::harvest {

namespace {

struct NameEntry {
    std::string_view name;
    std::string_view iso;
};

// English short names (ISO 3166-1) plus spellings common in affiliation lines.
constexpr NameEntry kCountryNames[] = {
    {"Afghanistan", "AF"}, {"Aland Islands", "AX"}, {"Albania", "AL"}, {"Algeria", "DZ"},
    {"American Samoa", "AS"}, {"Andorra", "AD"}, {"Angola", "AO"}, {"Anguilla", "AI"},
    {"Antarctica", "AQ"}, {"Antigua and Barbuda", "AG"}, {"Argentina", "AR"}, {"Armenia", "AM"},
    {"Aruba", "AW"}, {"Australia", "AU"}, {"Austria", "AT"}, {"Azerbaijan", "AZ"},
    {"Bahamas", "BS"}, {"Bahrain", "BH"}, {"Bangladesh", "BD"}, {"Barbados", "BB"},
    {"Belarus", "BY"}, {"Belgium", "BE"}, {"Belize", "BZ"}, {"Benin", "BJ"},
    {"Bermuda", "BM"}, {"Bhutan", "BT"}, {"Bolivia", "BO"}, {"Bosnia and Herzegovina", "BA"},
    {"Bosnia-Herzegovina", "BA"}, {"Botswana", "BW"}, {"Brazil", "BR"}, {"Brasil", "BR"},
    {"Brunei", "BN"}, {"Brunei Darussalam", "BN"}, {"Bulgaria", "BG"}, {"Burkina Faso", "BF"},
    {"Burundi", "BI"}, {"Cambodia", "KH"}, {"Cameroon", "CM"}, {"Canada", "CA"},
    {"Cape Verde", "CV"}, {"Cabo Verde", "CV"}, {"Cayman Islands", "KY"},
    {"Central African Republic", "CF"}, {"Chad", "TD"}, {"Chile", "CL"}, {"China", "CN"},
    {"P.R. China", "CN"}, {"PR China", "CN"}, {"People's Republic of China", "CN"},
    {"Colombia", "CO"}, {"Comoros", "KM"}, {"Congo", "CG"}, {"Republic of the Congo", "CG"},
    {"Democratic Republic of the Congo", "CD"}, {"DR Congo", "CD"}, {"Cook Islands", "CK"},
    {"Costa Rica", "CR"}, {"Cote d'Ivoire", "CI"}, {"Côte d'Ivoire", "CI"}, {"Ivory Coast", "CI"},
    {"Croatia", "HR"}, {"Cuba", "CU"}, {"Curacao", "CW"}, {"Cyprus", "CY"},
    {"Czech Republic", "CZ"}, {"Czechia", "CZ"}, {"Denmark", "DK"}, {"Djibouti", "DJ"},
    {"Dominica", "DM"}, {"Dominican Republic", "DO"}, {"Ecuador", "EC"}, {"Egypt", "EG"},
    {"El Salvador", "SV"}, {"Equatorial Guinea", "GQ"}, {"Eritrea", "ER"}, {"Estonia", "EE"},
    {"Eswatini", "SZ"}, {"Swaziland", "SZ"}, {"Ethiopia", "ET"}, {"Falkland Islands", "FK"},
    {"Faroe Islands", "FO"}, {"Fiji", "FJ"}, {"Finland", "FI"}, {"France", "FR"},
    {"French Guiana", "GF"}, {"French Polynesia", "PF"}, {"Gabon", "GA"}, {"Gambia", "GM"},
    {"Georgia", "GE"}, {"Germany", "DE"}, {"Ghana", "GH"}, {"Gibraltar", "GI"},
    {"Greece", "GR"}, {"Greenland", "GL"}, {"Grenada", "GD"}, {"Guadeloupe", "GP"},
    {"Guam", "GU"}, {"Guatemala", "GT"}, {"Guernsey", "GG"}, {"Guinea", "GN"},
    {"Guinea-Bissau", "GW"}, {"Guyana", "GY"}, {"Haiti", "HT"}, {"Honduras", "HN"},
    {"Hong Kong", "HK"}, {"Hong-Kong", "HK"}, {"Hungary", "HU"}, {"Iceland", "IS"},
    {"India", "IN"}, {"Indonesia", "ID"}, {"Iran", "IR"}, {"Islamic Republic of Iran", "IR"},
    {"Iraq", "IQ"}, {"Ireland", "IE"}, {"Isle of Man", "IM"}, {"Israel", "IL"},
    {"Italy", "IT"}, {"Jamaica", "JM"}, {"Japan", "JP"}, {"Jersey", "JE"},
    {"Jordan", "JO"}, {"Kazakhstan", "KZ"}, {"Kenya", "KE"}, {"Kiribati", "KI"},
    {"Kosovo", "XK"}, {"Kuwait", "KW"}, {"Kyrgyzstan", "KG"}, {"Laos", "LA"},
    {"Latvia", "LV"}, {"Lebanon", "LB"}, {"Lesotho", "LS"}, {"Liberia", "LR"},
    {"Libya", "LY"}, {"Liechtenstein", "LI"}, {"Lithuania", "LT"}, {"Luxembourg", "LU"},
    {"Macao", "MO"}, {"Macau", "MO"}, {"Macedonia", "MK"}, {"North Macedonia", "MK"},
    {"Madagascar", "MG"}, {"Malawi", "MW"}, {"Malaysia", "MY"}, {"Maldives", "MV"},
    {"Mali", "ML"}, {"Malta", "MT"}, {"Marshall Islands", "MH"}, {"Martinique", "MQ"},
    {"Mauritania", "MR"}, {"Mauritius", "MU"}, {"Mexico", "MX"}, {"Micronesia", "FM"},
    {"Moldova", "MD"}, {"Monaco", "MC"}, {"Mongolia", "MN"}, {"Montenegro", "ME"},
    {"Morocco", "MA"}, {"Mozambique", "MZ"}, {"Myanmar", "MM"}, {"Namibia", "NA"},
    {"Nauru", "NR"}, {"Nepal", "NP"}, {"Netherlands", "NL"}, {"The Netherlands", "NL"},
    {"New Caledonia", "NC"}, {"New Zealand", "NZ"}, {"Nicaragua", "NI"}, {"Niger", "NE"},
    {"Nigeria", "NG"}, {"North Korea", "KP"}, {"Norway", "NO"}, {"Oman", "OM"},
    {"Pakistan", "PK"}, {"Palau", "PW"}, {"Palestine", "PS"}, {"Panama", "PA"},
    {"Papua New Guinea", "PG"}, {"Paraguay", "PY"}, {"Peru", "PE"}, {"Philippines", "PH"},
    {"Poland", "PL"}, {"Portugal", "PT"}, {"Puerto Rico", "PR"}, {"Qatar", "QA"},
    {"Reunion", "RE"}, {"Romania", "RO"}, {"Russia", "RU"}, {"Russian Federation", "RU"},
    {"Rwanda", "RW"}, {"Saint Kitts and Nevis", "KN"}, {"Saint Lucia", "LC"},
    {"Saint Vincent and the Grenadines", "VC"}, {"Samoa", "WS"}, {"San Marino", "SM"},
    {"Sao Tome and Principe", "ST"}, {"Saudi Arabia", "SA"}, {"Senegal", "SN"}, {"Serbia", "RS"},
    {"Seychelles", "SC"}, {"Sierra Leone", "SL"}, {"Singapore", "SG"}, {"Slovakia", "SK"},
    {"Slovak Republic", "SK"}, {"Slovenia", "SI"}, {"Solomon Islands", "SB"}, {"Somalia", "SO"},
    {"South Africa", "ZA"}, {"South Korea", "KR"}, {"Republic of Korea", "KR"}, {"Korea", "KR"},
    {"South Sudan", "SS"}, {"Spain", "ES"}, {"Sri Lanka", "LK"}, {"Sudan", "SD"},
    {"Suriname", "SR"}, {"Sweden", "SE"}, {"Switzerland", "CH"}, {"Syria", "SY"},
    {"Syrian Arab Republic", "SY"}, {"Taiwan", "TW"}, {"Tajikistan", "TJ"}, {"Tanzania", "TZ"},
    {"Thailand", "TH"}, {"Timor-Leste", "TL"}, {"East Timor", "TL"}, {"Togo", "TG"},
    {"Tonga", "TO"}, {"Trinidad and Tobago", "TT"}, {"Tunisia", "TN"}, {"Turkey", "TR"},
    {"Turkiye", "TR"}, {"Turkmenistan", "TM"}, {"Tuvalu", "TV"}, {"Uganda", "UG"},
    {"Ukraine", "UA"}, {"United Arab Emirates", "AE"}, {"UAE", "AE"}, {"United Kingdom", "GB"},
    {"UK", "GB"}, {"U.K.", "GB"}, {"Great Britain", "GB"}, {"England", "GB"},
    {"Scotland", "GB"}, {"Wales", "GB"}, {"Northern Ireland", "GB"},
    {"United States of America", "US"}, {"United States", "US"}, {"USA", "US"},
    {"U.S.A.", "US"}, {"Uruguay", "UY"}, {"Uzbekistan", "UZ"}, {"Vanuatu", "VU"},
    {"Vatican City", "VA"}, {"Venezuela", "VE"}, {"Vietnam", "VN"}, {"Viet Nam", "VN"},
    {"Western Sahara", "EH"}, {"New South Wales", "AU"}, {"Yemen", "YE"}, {"Zambia", "ZM"}, {"Zimbabwe", "ZW"},
};

// Affiliation lines often stop at the state; these map to the United States.
constexpr std::string_view kUsStates[] = {
    "Alabama",       "Alaska",        "Arizona",        "Arkansas",     "California",
    "Colorado",      "Connecticut",   "Delaware",       "Florida",      "Georgia",
    "Hawaii",        "Idaho",         "Illinois",       "Indiana",      "Iowa",
    "Kansas",        "Kentucky",      "Louisiana",      "Maine",        "Maryland",
    "Massachusetts", "Michigan",      "Minnesota",      "Mississippi",  "Missouri",
    "Montana",       "Nebraska",      "Nevada",         "New Hampshire", "New Jersey",
    "New Mexico",    "New York",      "North Carolina", "North Dakota", "Ohio",
    "Oklahoma",      "Oregon",        "Pennsylvania",   "Rhode Island", "South Carolina",
    "South Dakota",  "Tennessee",     "Texas",          "Utah",         "Vermont",
    "Virginia",      "Washington",    "West Virginia",  "Wisconsin",    "Wyoming",
    "District of Columbia",
};

}  // namespace

const CountryNameTable& default_country_names() {
    static const CountryNameTable table = [] {
        CountryNameTable t;
        for (const auto& e : kCountryNames) t.add(std::string(e.name), std::string(e.iso));
        for (const auto& s : kUsStates) t.add(std::string(s), "US");
        return t;
    }();
    return table;
}

}  // namespace dwe::harvest
