# # Inferring author groups offline
#
# Gender comes from a first-name table.  Country comes from the email
# country-code domain, then a university name in the affiliation, then a
# city name.  Countries map to Advanced/Developing economies.
#
# The bundled name table is a small demo list; pass a full frequency table
# for real data.

# %%
from fairrank import AuthorRecord
from fairrank.attribution import (attribute_all, economy_of, infer_country, infer_gender,
                                  load_geo_tables, load_name_table)

names = load_name_table()
geo = load_geo_tables()
print(infer_gender("Maria Garcia", names), infer_gender("Xiaq Zed", names))

# %%
for email, affiliation in [("ann@cs.ox.ac.uk", None),
                           (None, "New York University, Courant Institute"),
                           ("bob@gmail.com", "IIT Delhi, New Delhi"),
                           (None, "Somewhere Institute")]:
    country = infer_country(email, affiliation, geo)
    economy = economy_of(country, geo) if country != "Unknown" else "Unknown"
    print(f"{str(email):18s} {str(affiliation):40s} {country:8s} {economy}")

# %% [markdown]
# `attribute_all` never touches labels that are already present, and reports
# coverage in the same shape as a group-count table.

# %%
authors = {
    "1": AuthorRecord("1", name="John Smith"),
    "2": AuthorRecord("2", name="Priya Patel", gender="Female"),
    "3": AuthorRecord("3", name="Qwzx Unknown"),
}
contacts = {"1": ("j@tue.nl", None), "3": (None, "University of Tokyo")}
table, report = attribute_all(authors, names, geo, contacts)
for row in report.rows():
    print(*row)
